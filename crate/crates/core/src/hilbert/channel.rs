use super::register::{Holder, Register, RegisterSystem};
use super::state::{DensityOperator, StateVector};
use super::unitary::UnitaryOp;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::{Tolerances, C64};

/// Channel in unitary-extension form: the input is joined with a fixed
/// ancilla, the dilation acts on both, and `traced` output registers are
/// discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOp {
    inputs: Vec<Register>,
    outputs: Vec<Register>,
    ancilla: StateVector,
    dilation: UnitaryOp,
    traced: Vec<Register>,
}

impl ChannelOp {
    /// Assembles a channel and validates it (unitary dilation, normalised
    /// ancilla, positive Choi matrix).
    pub fn new(
        inputs: Vec<Register>,
        outputs: Vec<Register>,
        ancilla: StateVector,
        dilation: UnitaryOp,
        traced: Vec<Register>,
    ) -> Result<Self> {
        let ch = Self::assemble(inputs, outputs, ancilla, dilation, traced)?;
        ch.validate(&Tolerances::default())?;
        Ok(ch)
    }

    fn assemble(
        inputs: Vec<Register>,
        outputs: Vec<Register>,
        ancilla: StateVector,
        dilation: UnitaryOp,
        traced: Vec<Register>,
    ) -> Result<Self> {
        let mut want_in = inputs.clone();
        want_in.extend(ancilla.system().registers().iter().cloned());
        if dilation.inputs() != want_in.as_slice() {
            return Err(Error::InvalidChannel(
                "dilation inputs must be the channel inputs followed by the ancilla registers".into(),
            ));
        }
        let mut want_out = outputs.clone();
        want_out.extend(traced.iter().cloned());
        if dilation.outputs() != want_out.as_slice() {
            return Err(Error::InvalidChannel(
                "dilation outputs must be the channel outputs followed by the traced registers".into(),
            ));
        }
        Ok(Self {
            inputs,
            outputs,
            ancilla,
            dilation,
            traced,
        })
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let dev = self.dilation.unitarity_deviation();
        if dev > tol.unit {
            return Err(Error::NotUnitary {
                deviation: dev,
                tolerance: tol.unit,
            });
        }
        if (self.ancilla.norm() - 1.0).abs() > tol.norm {
            return Err(Error::InvalidChannel("ancilla state is not normalised".into()));
        }
        let choi = self.choi()?;
        let min = linalg::hermitian_eigenvalues(&choi).first().copied().unwrap_or(0.0);
        if min < -tol.psd {
            return Err(Error::InvalidChannel(format!("Choi matrix has eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Unitary channel with a trivial ancilla.
    pub fn from_unitary(u: UnitaryOp) -> Self {
        Self {
            inputs: u.inputs().to_vec(),
            outputs: u.outputs().to_vec(),
            ancilla: StateVector::scalar(),
            dilation: u,
            traced: Vec::new(),
        }
    }

    /// Identity channel that relabels `inputs` as `outputs`.
    pub fn identity(inputs: Vec<Register>, outputs: Vec<Register>) -> Result<Self> {
        Ok(Self::from_unitary(UnitaryOp::relabel(inputs, outputs)?))
    }

    /// Stinespring dilation of a Kraus family. The environment register
    /// `env` is traced out; its dimension is the smallest value at least the
    /// number of Kraus operators that makes the dilation square.
    pub fn from_kraus(
        inputs: Vec<Register>,
        outputs: Vec<Register>,
        kraus: &[CMatrix],
        env: &str,
        ancilla_name: &str,
    ) -> Result<Self> {
        Self::from_kraus_with(inputs, outputs, kraus, env, ancilla_name, &Tolerances::default())
    }

    pub fn from_kraus_with(
        inputs: Vec<Register>,
        outputs: Vec<Register>,
        kraus: &[CMatrix],
        env: &str,
        ancilla_name: &str,
        tol: &Tolerances,
    ) -> Result<Self> {
        let din: usize = inputs.iter().map(|r| r.dim).product();
        let dout: usize = outputs.iter().map(|r| r.dim).product();
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("empty Kraus family".into()));
        }
        let mut completeness = CMatrix::zeros(din, din);
        for k in kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::DimMismatch(format!(
                    "Kraus operator is {}x{}, expected {}x{}",
                    k.nrows(),
                    k.ncols(),
                    dout,
                    din
                )));
            }
            completeness += k.adjoint() * k;
        }
        let dev = (completeness - linalg::identity(din)).camax();
        if dev > tol.eq {
            return Err(Error::InvalidChannel(format!("Kraus completeness violated by {dev:.3e}")));
        }
        let mut e = kraus.len();
        while (dout * e) % din != 0 {
            e += 1;
        }
        let anc_dim = dout * e / din;
        let total = dout * e;
        // Isometry columns V|i> = Σ_k K_k|i> ⊗ |k>_env, placed at ancilla |0>.
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(total);
        let mut mat = CMatrix::zeros(total, total);
        for i in 0..din {
            let mut v = vec![C64::new(0.0, 0.0); total];
            for (k, kop) in kraus.iter().enumerate() {
                for o in 0..dout {
                    v[o * e + k] = kop[(o, i)];
                }
            }
            cols.push(v);
        }
        let completed = complete_orthonormal(cols, total)?;
        // Input index = i * anc_dim + a; column for a = 0 is the isometry.
        let mut extra = completed[din..].iter();
        for i in 0..din {
            for a in 0..anc_dim {
                let col = if a == 0 {
                    &completed[i]
                } else {
                    extra.next().expect("enough completion vectors")
                };
                for (r, v) in col.iter().enumerate() {
                    mat[(r, i * anc_dim + a)] = *v;
                }
            }
        }
        let anc_reg = Register::new(ancilla_name, anc_dim);
        let env_reg = Register::new(env, e);
        let ancilla = StateVector::zeros(RegisterSystem::uniform(vec![anc_reg.clone()], Holder::Reference)?);
        let mut din_regs = inputs.clone();
        din_regs.push(anc_reg);
        let mut dout_regs = outputs.clone();
        dout_regs.push(env_reg.clone());
        let dilation = UnitaryOp::with_tolerances(din_regs, dout_regs, mat, tol)?;
        Self::assemble(inputs, outputs, ancilla, dilation, vec![env_reg])
    }

    /// Deterministic classical map `|i> -> |f(i)>` on basis inputs, realised
    /// by adding `f(i)` into a zero-initialised output register and moving
    /// the input into the traced register `copy`.
    pub fn from_basis_function(
        inputs: Vec<Register>,
        outputs: Vec<Register>,
        f: impl Fn(usize) -> usize,
        ancilla_name: &str,
        copy: &str,
    ) -> Result<Self> {
        let din: usize = inputs.iter().map(|r| r.dim).product();
        let dout: usize = outputs.iter().map(|r| r.dim).product();
        let table: Vec<usize> = (0..din).map(&f).collect();
        if let Some(bad) = table.iter().find(|&&v| v >= dout) {
            return Err(Error::InvalidChannel(format!("function value {bad} outside output alphabet of size {dout}")));
        }
        let anc = Register::new(ancilla_name, dout);
        let cp = Register::new(copy, din);
        let mut din_regs = inputs.clone();
        din_regs.push(anc.clone());
        let mut dout_regs = outputs.clone();
        dout_regs.push(cp.clone());
        // |i>|a> -> |a + f(i) mod dout>|i>
        let dilation = UnitaryOp::from_basis_map(din_regs, dout_regs, |idx| {
            let i = idx / dout;
            let a = idx % dout;
            ((a + table[i]) % dout) * din + i
        })?;
        let ancilla = StateVector::zeros(RegisterSystem::uniform(vec![anc], Holder::Reference)?);
        Self::assemble(inputs, outputs, ancilla, dilation, vec![cp])
    }

    /// Kraus operators `<e| U |anc>` over the traced basis.
    pub fn kraus(&self) -> Vec<CMatrix> {
        let din: usize = self.inputs.iter().map(|r| r.dim).product();
        let dout: usize = self.outputs.iter().map(|r| r.dim).product();
        let da = self.ancilla.dim();
        let de: usize = self.traced.iter().map(|r| r.dim).product();
        let u = self.dilation.matrix();
        let anc = self.ancilla.amplitudes();
        (0..de)
            .map(|e| {
                CMatrix::from_fn(dout, din, |o, i| {
                    let row = o * de + e;
                    let mut acc = C64::new(0.0, 0.0);
                    for (a, amp) in anc.iter().enumerate().take(da) {
                        acc += u[(row, i * da + a)] * amp;
                    }
                    acc
                })
            })
            .collect()
    }

    /// Convex combination `p self + (1-p) other` via concatenated Kraus families.
    pub fn mixture(&self, p: f64, other: &ChannelOp, env: &str, ancilla_name: &str) -> Result<Self> {
        if self.inputs != other.inputs || self.outputs != other.outputs {
            return Err(Error::InvalidChannel("mixing channels with different registers".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidChannel(format!("mixing weight {p} outside [0,1]")));
        }
        let mut kraus: Vec<CMatrix> = self.kraus().into_iter().map(|k| k * C64::new(p.sqrt(), 0.0)).collect();
        kraus.extend(other.kraus().into_iter().map(|k| k * C64::new((1.0 - p).sqrt(), 0.0)));
        Self::from_kraus(self.inputs.clone(), self.outputs.clone(), &kraus, env, ancilla_name)
    }

    /// Choi matrix `Σ_ij N(|i><j|) ⊗ |i><j|` (output factor first).
    pub fn choi(&self) -> Result<CMatrix> {
        let din: usize = self.inputs.iter().map(|r| r.dim).product();
        let dout: usize = self.outputs.iter().map(|r| r.dim).product();
        let mut j = CMatrix::zeros(dout * din, dout * din);
        for k in self.kraus() {
            // vec(K) with output index major: column vector v[(o, i)] = K[o, i].
            let v = nalgebra::DVector::from_fn(dout * din, |idx, _| k[(idx / din, idx % din)]);
            j += &v * v.adjoint();
        }
        Ok(j)
    }

    pub fn inputs(&self) -> &[Register] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Register] {
        &self.outputs
    }

    pub fn ancilla(&self) -> &StateVector {
        &self.ancilla
    }

    pub fn dilation(&self) -> &UnitaryOp {
        &self.dilation
    }

    pub fn traced(&self) -> &[Register] {
        &self.traced
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs.iter().map(|r| r.name.clone()).collect()
    }

    pub fn output_names(&self) -> Vec<String> {
        self.outputs.iter().map(|r| r.name.clone()).collect()
    }

    pub fn traced_names(&self) -> Vec<String> {
        self.traced.iter().map(|r| r.name.clone()).collect()
    }

    /// Runs the dilation on a global pure state, returning the pure state
    /// that still contains the traced registers.
    pub fn apply_dilation(&self, s: &StateVector) -> Result<StateVector> {
        let joined = s.tensor(&self.ancilla)?;
        let mut targets = self.input_names();
        targets.extend(self.ancilla.system().names());
        joined.apply_unitary(&self.dilation, &targets)
    }

    /// Applies the channel to the named registers of a density operator,
    /// tracing out the environment.
    pub fn apply_to_density(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let joined = rho.tensor(&self.ancilla.density())?;
        let out = joined.apply(&self.dilation)?;
        let keep: Vec<String> = out
            .system()
            .names()
            .into_iter()
            .filter(|n| !self.traced.iter().any(|t| &t.name == n))
            .collect();
        out.reduced_density(&keep)
    }

    /// Renames every register (inputs, outputs, ancilla, traced).
    pub fn map_names(&mut self, f: &impl Fn(&str) -> String) -> Result<()> {
        for r in self
            .inputs
            .iter_mut()
            .chain(self.outputs.iter_mut())
            .chain(self.traced.iter_mut())
        {
            r.name = f(&r.name);
        }
        for n in self.ancilla.system().names() {
            self.ancilla.rename(&n, &f(&n))?;
        }
        self.dilation.map_names(f);
        Ok(())
    }
}

/// Extends orthonormal `cols` to an orthonormal basis of `C^dim` by
/// Gram-Schmidt against the standard basis.
fn complete_orthonormal(mut cols: Vec<Vec<C64>>, dim: usize) -> Result<Vec<Vec<C64>>> {
    // Re-orthonormalise the given columns first (they are an isometry up to rounding).
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for v in cols.drain(..) {
        let w = orthogonalise(&basis, v);
        let n = norm(&w);
        if n < 1e-6 {
            return Err(Error::InvalidChannel("Kraus family does not define an isometry".into()));
        }
        basis.push(w.into_iter().map(|x| x / n).collect());
    }
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[k] = C64::new(1.0, 0.0);
        let w = orthogonalise(&basis, e);
        let n = norm(&w);
        if n > 1e-8 {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    if basis.len() != dim {
        return Err(Error::InvalidChannel("could not complete the dilation".into()));
    }
    Ok(basis)
}

fn orthogonalise(basis: &[Vec<C64>], mut v: Vec<C64>) -> Vec<C64> {
    // Two passes keep the result orthogonal to working precision.
    for _ in 0..2 {
        for b in basis {
            let c: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
    }
    v
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::unitary::gates;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn qubit() -> Vec<Register> {
        vec![Register::new("q", 2)]
    }

    fn pauli_inputs() -> Vec<DensityOperator> {
        // Density operators spanning the qubit operator space.
        let sys = RegisterSystem::uniform(qubit(), Holder::Alice).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let vecs = [
            vec![c(1.0), c(0.0)],
            vec![c(0.0), c(1.0)],
            vec![c(h), c(h)],
            vec![c(h), C64::new(0.0, h)],
        ];
        vecs.into_iter()
            .map(|v| StateVector::new(sys.clone(), v).unwrap().density())
            .collect()
    }

    #[test]
    fn unitary_channel_has_trivial_ancilla() {
        let u = UnitaryOp::on(Register::new("q", 2), gates::h()).unwrap();
        let ch = ChannelOp::from_unitary(u);
        assert_eq!(ch.ancilla().dim(), 1);
        assert!(ch.traced().is_empty());
        ch.validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn measurement_channel_dilation_matches_dephasing() {
        let p0 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        let p1 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        let ch = ChannelOp::from_kraus(qubit(), qubit(), &[p0, p1], "env", "anc").unwrap();
        for rho in pauli_inputs() {
            let out = ch.apply_to_density(&rho).unwrap();
            let want = rho.measurement_channel("q").unwrap();
            assert!((out.matrix() - want.matrix()).camax() < 1e-12);
        }
    }

    #[test]
    fn kraus_completeness_enforced() {
        let half = CMatrix::identity(2, 2) * c(0.5);
        let r = ChannelOp::from_kraus(qubit(), qubit(), &[half], "env", "anc");
        assert!(matches!(r, Err(Error::InvalidChannel(_))));
    }

    #[test]
    fn kraus_round_trip() {
        let amp = 0.3f64;
        let k0 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - amp).sqrt())]);
        let k1 = CMatrix::from_row_slice(2, 2, &[c(0.0), c(amp.sqrt()), c(0.0), c(0.0)]);
        let ch = ChannelOp::from_kraus(qubit(), qubit(), &[k0.clone(), k1.clone()], "env", "anc").unwrap();
        let ks = ch.kraus();
        // Same channel: compare actions on the spanning set.
        for rho in pauli_inputs() {
            let direct = &k0 * rho.matrix() * k0.adjoint() + &k1 * rho.matrix() * k1.adjoint();
            let via: CMatrix = ks.iter().map(|k| k * rho.matrix() * k.adjoint()).sum();
            assert!((direct - via).camax() < 1e-12);
        }
    }

    #[test]
    fn basis_function_channel() {
        // AND of two bits into one output bit.
        let ch = ChannelOp::from_basis_function(
            vec![Register::new("x", 2), Register::new("y", 2)],
            vec![Register::new("o", 2)],
            |i| usize::from(i == 3),
            "anc",
            "copy",
        )
        .unwrap();
        ch.validate(&Tolerances::default()).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let s = StateVector::basis(
                    RegisterSystem::uniform(vec![Register::new("x", 2), Register::new("y", 2)], Holder::Alice)
                        .unwrap(),
                    &[x, y],
                )
                .unwrap();
                let out = ch.apply_to_density(&s.density()).unwrap();
                let want = x & y;
                assert!((out.matrix()[(want, want)].re - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mixture_of_identity_and_flip() {
        let id = ChannelOp::identity(qubit(), qubit()).unwrap();
        let flip = ChannelOp::from_unitary(UnitaryOp::on(Register::new("q", 2), gates::x()).unwrap());
        let mix = id.mixture(0.25, &flip, "env", "anc").unwrap();
        let rho = &pauli_inputs()[0];
        let out = mix.apply_to_density(rho).unwrap();
        assert!((out.matrix()[(0, 0)].re - 0.25).abs() < 1e-12);
        assert!((out.matrix()[(1, 1)].re - 0.75).abs() < 1e-12);
    }
}
