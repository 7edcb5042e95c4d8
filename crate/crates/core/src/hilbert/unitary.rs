use super::register::{Holder, Register, RegisterSystem};
use super::state::{DensityOperator, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::{Tolerances, C64};

/// Unitary map from the tensor product of `inputs` to that of `outputs`.
/// Input and output factorisations may differ; only the total dimensions
/// must agree.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    inputs: Vec<Register>,
    outputs: Vec<Register>,
    matrix: CMatrix,
}

impl UnitaryOp {
    pub fn new(inputs: Vec<Register>, outputs: Vec<Register>, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(inputs, outputs, matrix, &Tolerances::default())
    }

    pub fn with_tolerances(
        inputs: Vec<Register>,
        outputs: Vec<Register>,
        matrix: CMatrix,
        tol: &Tolerances,
    ) -> Result<Self> {
        let op = Self::unchecked(inputs, outputs, matrix)?;
        let dev = linalg::unitarity_deviation(&op.matrix);
        if dev > tol.unit {
            return Err(Error::NotUnitary {
                deviation: dev,
                tolerance: tol.unit,
            });
        }
        Ok(op)
    }

    /// Checks shapes and name uniqueness but not unitarity.
    pub fn unchecked(inputs: Vec<Register>, outputs: Vec<Register>, matrix: CMatrix) -> Result<Self> {
        // Uniqueness on each side.
        RegisterSystem::uniform(inputs.clone(), Holder::Alice)?;
        RegisterSystem::uniform(outputs.clone(), Holder::Alice)?;
        let din: usize = inputs.iter().map(|r| r.dim).product();
        let dout: usize = outputs.iter().map(|r| r.dim).product();
        if din != dout || matrix.nrows() != dout || matrix.ncols() != din {
            return Err(Error::DimMismatch(format!(
                "unitary is {}x{} but maps dimension {} to {}",
                matrix.nrows(),
                matrix.ncols(),
                din,
                dout
            )));
        }
        Ok(Self {
            inputs,
            outputs,
            matrix,
        })
    }

    /// Identity on `registers`, keeping names.
    pub fn identity(registers: Vec<Register>) -> Self {
        let d = registers.iter().map(|r| r.dim).product();
        Self {
            inputs: registers.clone(),
            outputs: registers,
            matrix: linalg::identity(d),
        }
    }

    /// Identity map that relabels `inputs` as `outputs`.
    pub fn relabel(inputs: Vec<Register>, outputs: Vec<Register>) -> Result<Self> {
        let d = inputs.iter().map(|r| r.dim).product();
        Self::unchecked(inputs, outputs, linalg::identity(d))
    }

    /// Same matrix acting on a single register (in and out names equal).
    pub fn on(register: Register, matrix: CMatrix) -> Result<Self> {
        Self::new(vec![register.clone()], vec![register], matrix)
    }

    /// Permutation unitary `|i> -> |map(i)>`, erroring if `map` is not a
    /// bijection on the basis.
    pub fn from_basis_map(
        inputs: Vec<Register>,
        outputs: Vec<Register>,
        map: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        let d: usize = inputs.iter().map(|r| r.dim).product();
        let mut m = CMatrix::zeros(d, d);
        let mut hit = vec![false; d];
        for i in 0..d {
            let j = map(i);
            if j >= d || hit[j] {
                return Err(Error::Construction(format!("basis map is not a bijection at {i} -> {j}")));
            }
            hit[j] = true;
            m[(j, i)] = C64::new(1.0, 0.0);
        }
        Self::unchecked(inputs, outputs, m)
    }

    /// Selector-controlled permutation of register blocks.
    ///
    /// The control register passes through unchanged as the first output.
    /// For control value `c`, output factor `k` receives input factor
    /// `routes[c][k]`; each route must be a dimension-preserving
    /// permutation of the non-control factors.
    pub fn controlled_routing(
        control: Register,
        inputs: Vec<Register>,
        outputs: Vec<Register>,
        routes: &[Vec<usize>],
    ) -> Result<Self> {
        if routes.len() != control.dim {
            return Err(Error::Construction(format!(
                "{} routes for a control of dimension {}",
                routes.len(),
                control.dim
            )));
        }
        if inputs.len() != outputs.len() {
            return Err(Error::Construction("routing needs as many output factors as inputs".into()));
        }
        for (c, route) in routes.iter().enumerate() {
            let mut seen = vec![false; inputs.len()];
            if route.len() != outputs.len() {
                return Err(Error::Construction(format!("route {c} has the wrong length")));
            }
            for (k, &src) in route.iter().enumerate() {
                if src >= inputs.len() || seen[src] {
                    return Err(Error::Construction(format!("route {c} is not a permutation")));
                }
                seen[src] = true;
                if inputs[src].dim != outputs[k].dim {
                    return Err(Error::Construction(format!(
                        "route {c} sends {} into {} of a different dimension",
                        inputs[src], outputs[k]
                    )));
                }
            }
        }
        let in_dims: Vec<usize> = inputs.iter().map(|r| r.dim).collect();
        let out_dims: Vec<usize> = outputs.iter().map(|r| r.dim).collect();
        let block: usize = in_dims.iter().product();
        let mut all_in = vec![control.clone()];
        all_in.extend(inputs);
        let mut all_out = vec![control.clone()];
        all_out.extend(outputs);
        let nf = in_dims.len();
        Self::from_basis_map(all_in, all_out, |i| {
            let c = i / block;
            let mut rest = i % block;
            let mut digits = vec![0usize; nf];
            for k in (0..nf).rev() {
                digits[k] = rest % in_dims[k];
                rest /= in_dims[k];
            }
            let mut j = 0;
            for (k, &src) in routes[c].iter().enumerate() {
                j = j * out_dims[k] + digits[src];
            }
            c * block + j
        })
    }

    pub fn inputs(&self) -> &[Register] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Register] {
        &self.outputs
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs.iter().map(|r| r.name.clone()).collect()
    }

    pub fn output_names(&self) -> Vec<String> {
        self.outputs.iter().map(|r| r.name.clone()).collect()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn unitarity_deviation(&self) -> f64 {
        linalg::unitarity_deviation(&self.matrix)
    }

    /// Inverse map, from outputs back to inputs.
    pub fn adjoint(&self) -> Self {
        Self {
            inputs: self.outputs.clone(),
            outputs: self.inputs.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self ⊗ other` on disjoint registers.
    pub fn tensor(&self, other: &UnitaryOp) -> Result<Self> {
        let mut inputs = self.inputs.clone();
        inputs.extend(other.inputs.iter().cloned());
        let mut outputs = self.outputs.clone();
        outputs.extend(other.outputs.iter().cloned());
        RegisterSystem::uniform(inputs.clone(), Holder::Alice)?;
        RegisterSystem::uniform(outputs.clone(), Holder::Alice)?;
        Ok(Self {
            inputs,
            outputs,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        })
    }

    /// `other ∘ self`; `other` must consume exactly this op's outputs.
    pub fn then(&self, other: &UnitaryOp) -> Result<Self> {
        if other.inputs != self.outputs {
            return Err(Error::DimMismatch("composition needs matching registers".into()));
        }
        Ok(Self {
            inputs: self.inputs.clone(),
            outputs: other.outputs.clone(),
            matrix: &other.matrix * &self.matrix,
        })
    }

    /// Renames a register on either side.
    pub fn rename(&mut self, from: &str, to: &str) {
        for r in self.inputs.iter_mut().chain(self.outputs.iter_mut()) {
            if r.name == from {
                r.name = to.to_string();
            }
        }
    }

    pub fn map_names(&mut self, f: &impl Fn(&str) -> String) {
        for r in self.inputs.iter_mut().chain(self.outputs.iter_mut()) {
            r.name = f(&r.name);
        }
    }
}

impl StateVector {
    /// Applies `u` with its input slots bound to `targets` (in order).
    /// The targets are removed and `u`'s output registers are appended at
    /// the end of the register list; they inherit the first target's holder.
    pub fn apply_unitary<S: AsRef<str>>(&self, u: &UnitaryOp, targets: &[S]) -> Result<StateVector> {
        let system = self.system();
        if targets.len() != u.inputs.len() {
            return Err(Error::DimMismatch(format!(
                "{} targets for a unitary with {} inputs",
                targets.len(),
                u.inputs.len()
            )));
        }
        let tp = system.positions(targets)?;
        for (&p, r) in tp.iter().zip(&u.inputs) {
            let have = system.registers()[p].dim;
            if have != r.dim {
                return Err(Error::DimMismatch(format!(
                    "register {} has dimension {} but the unitary expects {}",
                    system.registers()[p].name,
                    have,
                    r.dim
                )));
            }
        }
        let rp = system.complement(&tp);
        let rest = system.select(&rp);
        for r in &u.outputs {
            if rest.contains(&r.name) {
                return Err(Error::NameCollision(r.name.clone()));
            }
        }
        let holder = tp.first().map(|&p| system.holders()[p]).unwrap_or(Holder::Alice);
        let to = system.offsets(&tp);
        let ro = system.offsets(&rp);
        let dt = to.len();
        let amps = self.amplitudes();
        // Column-sparse form; routing unitaries are permutations.
        let cols: Vec<Vec<(usize, C64)>> = (0..dt)
            .map(|j| {
                (0..dt)
                    .filter_map(|i| {
                        let v = u.matrix[(i, j)];
                        (v.re != 0.0 || v.im != 0.0).then_some((i, v))
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        for (r, &roff) in ro.iter().enumerate() {
            let dst = &mut out[r * dt..(r + 1) * dt];
            for (col, &toff) in cols.iter().zip(&to) {
                let bj = amps[roff + toff];
                if bj.re == 0.0 && bj.im == 0.0 {
                    continue;
                }
                for &(i, v) in col {
                    dst[i] += v * bj;
                }
            }
        }
        let mut regs = rest.registers().to_vec();
        regs.extend(u.outputs.iter().cloned());
        let mut holders = rest.holders().to_vec();
        holders.extend(vec![holder; u.outputs.len()]);
        let mut sys = RegisterSystem::empty();
        sys.replace(regs, holders);
        Ok(StateVector::from_parts(sys, out))
    }

    /// Applies `u` to the registers named by its own inputs.
    pub fn apply(&self, u: &UnitaryOp) -> Result<StateVector> {
        let names = u.input_names();
        self.apply_unitary(u, &names)
    }
}

impl DensityOperator {
    /// `(U ⊗ I) ρ (U ⊗ I)^dagger` with `u`'s inputs bound to its own names.
    /// Output registers are appended after the untouched ones.
    pub fn apply(&self, u: &UnitaryOp) -> Result<DensityOperator> {
        let names = u.input_names();
        let system = self.system();
        let tp = system.positions(&names)?;
        for (&p, r) in tp.iter().zip(&u.inputs) {
            if system.registers()[p].dim != r.dim {
                return Err(Error::DimMismatch(format!("register {} dimension mismatch", r.name)));
            }
        }
        let rp = system.complement(&tp);
        let rest = system.select(&rp);
        let mut order: Vec<String> = rest.names();
        order.extend(names.iter().cloned());
        let permuted = self.permute(&order)?;
        let full = linalg::kron(&linalg::identity(rest.total_dim()), &u.matrix);
        let matrix = &full * permuted.matrix() * full.adjoint();
        let holder = tp.first().map(|&p| system.holders()[p]).unwrap_or(Holder::Alice);
        let mut regs = rest.registers().to_vec();
        regs.extend(u.outputs.iter().cloned());
        let mut holders = rest.holders().to_vec();
        holders.extend(vec![holder; u.outputs.len()]);
        let sys = RegisterSystem::new(regs, holders)?;
        Ok(DensityOperator::from_parts(sys, matrix))
    }
}

/// Common single- and two-qubit gates.
pub mod gates {
    use super::*;

    fn m2(a: [f64; 4]) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &a.map(|x| C64::new(x, 0.0)))
    }

    pub fn x() -> CMatrix {
        m2([0.0, 1.0, 1.0, 0.0])
    }

    pub fn z() -> CMatrix {
        m2([1.0, 0.0, 0.0, -1.0])
    }

    pub fn h() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        m2([s, s, s, -s])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        )
    }

    /// Rotation `exp(-i θ Y / 2)`.
    pub fn ry(theta: f64) -> CMatrix {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        m2([c, -s, s, c])
    }

    /// CNOT with the first factor as control.
    pub fn cnot() -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            m[(i, j)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Generalised X: `|k> -> |k + shift mod d>`.
    pub fn shift(d: usize, shift: usize) -> CMatrix {
        let mut m = CMatrix::zeros(d, d);
        for k in 0..d {
            m[((k + shift) % d, k)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// SWAP of two registers of equal dimension `d`.
    pub fn swap(d: usize) -> CMatrix {
        let mut m = CMatrix::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                m[(b * d + a, a * d + b)] = C64::new(1.0, 0.0);
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(name: &str) -> Register {
        Register::new(name, 2)
    }

    fn two_qubits() -> RegisterSystem {
        RegisterSystem::uniform(vec![q("a"), q("b")], Holder::Alice).unwrap()
    }

    #[test]
    fn x_flips_zero() {
        let s = StateVector::zeros(RegisterSystem::uniform(vec![q("a")], Holder::Alice).unwrap());
        let x = UnitaryOp::on(q("a"), gates::x()).unwrap();
        let t = s.apply(&x).unwrap();
        assert_eq!(t.amplitudes()[1], C64::new(1.0, 0.0));
    }

    #[test]
    fn bell_circuit() {
        let s = StateVector::zeros(two_qubits());
        let h = UnitaryOp::on(q("a"), gates::h()).unwrap();
        let cx = UnitaryOp::new(vec![q("a"), q("b")], vec![q("a"), q("b")], gates::cnot()).unwrap();
        let t = s.apply(&h).unwrap().apply(&cx).unwrap();
        let t = t.permute(&["a", "b"]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let want = [r, 0.0, 0.0, r];
        for (a, w) in t.amplitudes().iter().zip(want) {
            assert!((a - C64::new(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn apply_then_adjoint_round_trips() {
        let u = crate::hilbert::haar_random_unitary(4, 7);
        let u = UnitaryOp::new(vec![q("a"), q("b")], vec![Register::new("c", 4)], u.matrix().clone()).unwrap();
        let s = StateVector::normalized(
            RegisterSystem::uniform(vec![q("a"), Register::new("z", 3), q("b")], Holder::Bob).unwrap(),
            (0..12).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect(),
        )
        .unwrap();
        let t = s.apply(&u).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-12);
        assert!(t.system().contains("c") && !t.system().contains("a"));
        let back = t.apply(&u.adjoint()).unwrap().permute(&["a", "z", "b"]).unwrap();
        for (x, y) in back.amplitudes().iter().zip(s.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_errors() {
        let s = StateVector::zeros(two_qubits());
        let u3 = UnitaryOp::on(Register::new("a", 3), gates::shift(3, 1)).unwrap();
        assert!(matches!(s.apply(&u3), Err(Error::DimMismatch(_))));
        let uc = UnitaryOp::on(q("c"), gates::x()).unwrap();
        assert!(matches!(s.apply(&uc), Err(Error::UnknownRegister(_))));
        let clash = UnitaryOp::relabel(vec![q("a")], vec![q("b")]).unwrap();
        assert!(matches!(s.apply(&clash), Err(Error::NameCollision(_))));
    }

    #[test]
    fn non_unitary_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(matches!(UnitaryOp::on(q("a"), m), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn controlled_routing_swaps_on_one() {
        let u = UnitaryOp::controlled_routing(
            q("s"),
            vec![q("a"), q("b")],
            vec![q("x"), q("y")],
            &[vec![0, 1], vec![1, 0]],
        )
        .unwrap();
        assert!(u.unitarity_deviation() < 1e-15);
        // |s=1, a=1, b=0> -> |s=1, x=0, y=1>
        let s = StateVector::basis(
            RegisterSystem::uniform(vec![q("s"), q("a"), q("b")], Holder::Alice).unwrap(),
            &[1, 1, 0],
        )
        .unwrap();
        let t = s.apply(&u).unwrap();
        let want = StateVector::basis(t.system().clone(), &[1, 0, 1]).unwrap();
        assert_eq!(t, want);
    }

    #[test]
    fn density_apply_matches_vector_apply() {
        let u = crate::hilbert::haar_random_unitary(2, 3);
        let u = UnitaryOp::on(q("b"), u.matrix().clone()).unwrap();
        let s = StateVector::normalized(two_qubits(), vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.5, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let via_vec = s.apply(&u).unwrap().density();
        let via_rho = s.density().apply(&u).unwrap();
        assert!((via_vec.matrix() - via_rho.matrix()).norm() < 1e-12);
    }
}
