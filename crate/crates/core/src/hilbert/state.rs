use nalgebra::DVector;

use super::register::{Holder, Register, RegisterSystem};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::{Tolerances, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Pure state over a register system.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    system: RegisterSystem,
    amps: Vec<C64>,
}

/// Mixed state over a register system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    system: RegisterSystem,
    matrix: CMatrix,
}

/// Probability table over `X × Y`, stored row-major (`x` most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub nx: usize,
    pub ny: usize,
    pub probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(nx: usize, ny: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != nx * ny {
            return Err(Error::InvalidDistribution(format!(
                "expected {} entries for a {}x{} table, got {}",
                nx * ny,
                nx,
                ny,
                probs.len()
            )));
        }
        Ok(Self { nx, ny, probs })
    }

    /// Validates nonnegativity and normalisation.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if let Some(p) = self.probs.iter().find(|p| **p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidDistribution(format!("negative or non-finite probability {p}")));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!("total mass {total}")));
        }
        Ok(())
    }

    pub fn point(nx: usize, ny: usize, x: usize, y: usize) -> Self {
        let mut probs = vec![0.0; nx * ny];
        probs[x * ny + y] = 1.0;
        Self { nx, ny, probs }
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.ny + y]
    }

    /// Support in lexicographic `(x, y)` order.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.nx {
            for y in 0..self.ny {
                if self.p(x, y) > 0.0 {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Product distribution over `(X1 X2) × (Y1 Y2)` with `x = x1 * nx2 + x2`.
    pub fn product(&self, other: &JointDistribution) -> Self {
        let nx = self.nx * other.nx;
        let ny = self.ny * other.ny;
        let mut probs = vec![0.0; nx * ny];
        for x1 in 0..self.nx {
            for y1 in 0..self.ny {
                for x2 in 0..other.nx {
                    for y2 in 0..other.ny {
                        let x = x1 * other.nx + x2;
                        let y = y1 * other.ny + y2;
                        probs[x * ny + y] = self.p(x1, y1) * other.p(x2, y2);
                    }
                }
            }
        }
        Self { nx, ny, probs }
    }

    /// Classical density operator `Σ p(x,y) |x><x| ⊗ |y><y|`.
    pub fn density(&self, a: &[Register], b: &[Register]) -> Result<DensityOperator> {
        let (da, db) = self.check_shapes(a, b)?;
        let mut sys_regs = a.to_vec();
        sys_regs.extend(b.iter().cloned());
        let mut holders = vec![Holder::Alice; a.len()];
        holders.extend(vec![Holder::Bob; b.len()]);
        let system = RegisterSystem::new(sys_regs, holders)?;
        let mut m = CMatrix::zeros(da * db, da * db);
        for x in 0..da {
            for y in 0..db {
                let i = x * db + y;
                m[(i, i)] = C64::new(self.p(x, y), 0.0);
            }
        }
        Ok(DensityOperator::from_parts(system, m))
    }

    fn check_shapes(&self, a: &[Register], b: &[Register]) -> Result<(usize, usize)> {
        let da: usize = a.iter().map(|r| r.dim).product();
        let db: usize = b.iter().map(|r| r.dim).product();
        if da != self.nx || db != self.ny {
            return Err(Error::DimMismatch(format!(
                "distribution is {}x{} but registers span {}x{}",
                self.nx, self.ny, da, db
            )));
        }
        Ok((da, db))
    }
}

/// Gathers amplitudes into a row-major `keep x rest` matrix.
fn gather_matrix(amps: &[C64], keep_off: &[usize], rest_off: &[usize]) -> Vec<C64> {
    let mut data = Vec::with_capacity(keep_off.len() * rest_off.len());
    for &k in keep_off {
        for &r in rest_off {
            data.push(amps[k + r]);
        }
    }
    data
}

impl StateVector {
    /// Builds a state, checking length and unit norm within `tol.norm`.
    pub fn new(system: RegisterSystem, amps: Vec<C64>) -> Result<Self> {
        Self::with_tolerances(system, amps, &Tolerances::default())
    }

    pub fn with_tolerances(system: RegisterSystem, amps: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        if amps.len() != system.total_dim() {
            return Err(Error::DimMismatch(format!(
                "{} amplitudes for a system of dimension {}",
                amps.len(),
                system.total_dim()
            )));
        }
        let s = Self { system, amps };
        let n = s.norm();
        if (n - 1.0).abs() > tol.norm {
            return Err(Error::InvalidState(format!("norm {n} differs from 1")));
        }
        Ok(s)
    }

    /// Scales the amplitudes to unit norm.
    pub fn normalized(system: RegisterSystem, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != system.total_dim() {
            return Err(Error::DimMismatch(format!(
                "{} amplitudes for a system of dimension {}",
                amps.len(),
                system.total_dim()
            )));
        }
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        let amps = amps.into_iter().map(|a| a / n).collect();
        Ok(Self { system, amps })
    }

    pub(crate) fn from_parts(system: RegisterSystem, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), system.total_dim());
        Self { system, amps }
    }

    /// Computational basis state with the given digit per register.
    pub fn basis(system: RegisterSystem, digits: &[usize]) -> Result<Self> {
        if digits.len() != system.len() {
            return Err(Error::DimMismatch(format!(
                "{} digits for {} registers",
                digits.len(),
                system.len()
            )));
        }
        let strides = system.strides();
        let mut idx = 0;
        for ((d, r), s) in digits.iter().zip(system.registers()).zip(&strides) {
            if *d >= r.dim {
                return Err(Error::DimMismatch(format!("digit {d} out of range for {r}")));
            }
            idx += d * s;
        }
        let mut amps = vec![ZERO; system.total_dim()];
        amps[idx] = C64::new(1.0, 0.0);
        Ok(Self { system, amps })
    }

    /// All-zeros basis state.
    pub fn zeros(system: RegisterSystem) -> Self {
        let mut amps = vec![ZERO; system.total_dim()];
        amps[0] = C64::new(1.0, 0.0);
        Self { system, amps }
    }

    /// State on an empty system (the scalar 1).
    pub fn scalar() -> Self {
        Self {
            system: RegisterSystem::empty(),
            amps: vec![C64::new(1.0, 0.0)],
        }
    }

    pub fn system(&self) -> &RegisterSystem {
        &self.system
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_parts(self) -> (RegisterSystem, Vec<C64>) {
        (self.system, self.amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`; systems must agree register-for-register.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.system.registers() != other.system.registers() {
            return Err(Error::DimMismatch("inner product of states on different systems".into()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn set_holder(&mut self, name: &str, holder: Holder) -> Result<()> {
        self.system.set_holder(name, holder)
    }

    pub fn with_holder(mut self, holder: Holder) -> Self {
        for n in self.system.names() {
            self.system.set_holder(&n, holder).expect("own register");
        }
        self
    }

    pub fn system_mut(&mut self) -> &mut RegisterSystem {
        &mut self.system
    }

    pub fn rename(&mut self, from: &str, to: &str) -> Result<()> {
        self.system.rename(from, to)
    }

    /// `self ⊗ other` on the concatenated system.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let system = self.system.concat(&other.system)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(Self { system, amps })
    }

    /// Re-indexes to the register order `order`, which must be a permutation
    /// of the system's registers.
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<StateVector> {
        let positions = permutation_positions(&self.system, order)?;
        if positions.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let offsets = self.system.offsets(&positions);
        let amps = offsets.iter().map(|&o| self.amps[o]).collect();
        Ok(Self {
            system: self.system.select(&positions),
            amps,
        })
    }

    /// Reduced state on `keep` (in the order listed), computed from the
    /// `keep x complement` amplitude matrix `M` as `M M^dagger`.
    pub fn reduced_density<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let kp = self.system.positions(keep)?;
        let rp = self.system.complement(&kp);
        let ko = self.system.offsets(&kp);
        let ro = self.system.offsets(&rp);
        let data = gather_matrix(&self.amps, &ko, &ro);
        let m = linalg::gram_rows(&data, ko.len(), ro.len());
        Ok(DensityOperator::from_parts(self.system.select(&kp), m))
    }

    /// Nonzero spectrum of the reduction to `subsystem`, evaluated on
    /// whichever of the subsystem or its complement is smaller (a pure
    /// state has equal spectra on both sides).
    pub fn reduced_spectrum<S: AsRef<str>>(&self, subsystem: &[S]) -> Result<Vec<f64>> {
        let kp = self.system.positions(subsystem)?;
        let rp = self.system.complement(&kp);
        let ko = self.system.offsets(&kp);
        let ro = self.system.offsets(&rp);
        let data = gather_matrix(&self.amps, &ko, &ro);
        let g = if ko.len() <= ro.len() {
            linalg::gram_rows(&data, ko.len(), ro.len())
        } else {
            linalg::gram_cols(&data, ko.len(), ro.len())
        };
        Ok(linalg::hermitian_eigenvalues(&g))
    }

    /// Full density `|ψ><ψ|`; quadratic in the dimension.
    pub fn density(&self) -> DensityOperator {
        let v = DVector::from_column_slice(&self.amps);
        DensityOperator::from_parts(self.system.clone(), &v * v.adjoint())
    }
}

fn permutation_positions<S: AsRef<str>>(system: &RegisterSystem, order: &[S]) -> Result<Vec<usize>> {
    if order.len() != system.len() {
        return Err(Error::NotAPermutation(format!(
            "{} names given for {} registers",
            order.len(),
            system.len()
        )));
    }
    system.positions(order).map_err(|e| Error::NotAPermutation(e.to_string()))
}

impl DensityOperator {
    /// Builds a density operator after checking Hermiticity, unit trace and
    /// positivity against `Tolerances::default()`.
    pub fn new(system: RegisterSystem, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(system, matrix, &Tolerances::default())
    }

    pub fn with_tolerances(system: RegisterSystem, matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        let d = system.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimMismatch(format!(
                "{}x{} matrix for a system of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                d
            )));
        }
        let herm = linalg::hermiticity_deviation(&matrix);
        if herm > tol.herm {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > tol.norm || tr.im.abs() > tol.norm {
            return Err(Error::InvalidState(format!("trace {} differs from 1", tr.re)));
        }
        let min = linalg::hermitian_eigenvalues(&matrix).first().copied().unwrap_or(0.0);
        if min < -tol.psd {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { system, matrix })
    }

    pub(crate) fn from_parts(system: RegisterSystem, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), system.total_dim());
        Self { system, matrix }
    }

    pub fn system(&self) -> &RegisterSystem {
        &self.system
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn set_holder(&mut self, name: &str, holder: Holder) -> Result<()> {
        self.system.set_holder(name, holder)
    }

    pub fn rename(&mut self, from: &str, to: &str) -> Result<()> {
        self.system.rename(from, to)
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let system = self.system.concat(&other.system)?;
        Ok(Self {
            system,
            matrix: linalg::kron(&self.matrix, &other.matrix),
        })
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<DensityOperator> {
        let positions = permutation_positions(&self.system, order)?;
        if positions.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let off = self.system.offsets(&positions);
        let d = off.len();
        let matrix = CMatrix::from_fn(d, d, |i, j| self.matrix[(off[i], off[j])]);
        Ok(Self {
            system: self.system.select(&positions),
            matrix,
        })
    }

    /// Partial trace onto `keep`, in the order listed.
    pub fn reduced_density<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let kp = self.system.positions(keep)?;
        let rp = self.system.complement(&kp);
        let ko = self.system.offsets(&kp);
        let ro = self.system.offsets(&rp);
        let dk = ko.len();
        let mut m = CMatrix::zeros(dk, dk);
        for a in 0..dk {
            for b in 0..dk {
                let mut acc = ZERO;
                for &r in &ro {
                    acc += self.matrix[(ko[a] + r, ko[b] + r)];
                }
                m[(a, b)] = acc;
            }
        }
        Ok(Self {
            system: self.system.select(&kp),
            matrix: m,
        })
    }

    /// Pure state on `system ⊗ ref_name` whose reduction is `self`. The
    /// reference dimension equals the rank (eigenvalues above `tol.psd`).
    pub fn purify(&self, ref_name: &str) -> Result<StateVector> {
        self.purify_with(ref_name, &Tolerances::default())
    }

    pub fn purify_with(&self, ref_name: &str, tol: &Tolerances) -> Result<StateVector> {
        if self.system.contains(ref_name) {
            return Err(Error::NameCollision(ref_name.to_string()));
        }
        let (vals, vecs) = linalg::hermitian_eigen(&self.matrix);
        if let Some(&min) = vals.first() {
            if min < -tol.psd {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
            }
        }
        let kept: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > tol.psd).rev().collect();
        if kept.is_empty() {
            return Err(Error::InvalidState("zero operator has no purification".into()));
        }
        let rank = kept.len();
        let d = self.dim();
        let mut amps = vec![ZERO; d * rank];
        for (col, &k) in kept.iter().enumerate() {
            let w = vals[k].sqrt();
            for i in 0..d {
                amps[i * rank + col] = vecs[(i, k)] * w;
            }
        }
        let reference = RegisterSystem::new(vec![Register::new(ref_name, rank)], vec![Holder::Reference])?;
        let system = self.system.concat(&reference)?;
        Ok(StateVector::from_parts(system, amps))
    }

    /// Measurement channel on `reg`: zeroes coherences between different
    /// computational-basis values of that register.
    pub fn measurement_channel(&self, reg: &str) -> Result<DensityOperator> {
        let p = self
            .system
            .position(reg)
            .ok_or_else(|| Error::UnknownRegister(reg.to_string()))?;
        let stride = self.system.strides()[p];
        let dim = self.system.registers()[p].dim;
        let digit = |i: usize| (i / stride) % dim;
        let d = self.dim();
        let matrix = CMatrix::from_fn(d, d, |i, j| {
            if digit(i) == digit(j) {
                self.matrix[(i, j)]
            } else {
                ZERO
            }
        });
        Ok(Self {
            system: self.system.clone(),
            matrix,
        })
    }

    /// `p self + (1-p) other`; systems must agree.
    pub fn mix(&self, p: f64, other: &DensityOperator) -> Result<DensityOperator> {
        if self.system.registers() != other.system.registers() {
            return Err(Error::DimMismatch("mixing states on different systems".into()));
        }
        Ok(Self {
            system: self.system.clone(),
            matrix: &self.matrix * C64::new(p, 0.0) + &other.matrix * C64::new(1.0 - p, 0.0),
        })
    }

    /// `U ρ U^dagger` for a full-system matrix `u` (no register renaming).
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityOperator> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimMismatch("conjugating with a matrix of the wrong size".into()));
        }
        Ok(Self {
            system: self.system.clone(),
            matrix: u * &self.matrix * u.adjoint(),
        })
    }

    /// Maximally mixed state on the given registers.
    pub fn maximally_mixed(system: RegisterSystem) -> Self {
        let d = system.total_dim();
        let matrix = CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        Self { system, matrix }
    }
}

/// Canonical purification of a classical bipartite distribution,
/// `Σ sqrt(p(x,y)) |x>_A |y>_B |k(x,y)>_R` where `k` enumerates the support
/// in lexicographic order, so the reference dimension equals the support size.
pub fn canonical_classical_purification(
    dist: &JointDistribution,
    a_in: &[Register],
    b_in: &[Register],
    ref_name: &str,
) -> Result<StateVector> {
    canonical_classical_purification_with(dist, a_in, b_in, ref_name, &Tolerances::default())
}

pub fn canonical_classical_purification_with(
    dist: &JointDistribution,
    a_in: &[Register],
    b_in: &[Register],
    ref_name: &str,
    tol: &Tolerances,
) -> Result<StateVector> {
    dist.validate(tol.norm)?;
    let (_, db) = dist.check_shapes(a_in, b_in)?;
    let support = dist.support();
    let rdim = support.len();
    let mut regs = a_in.to_vec();
    regs.extend(b_in.iter().cloned());
    regs.push(Register::new(ref_name, rdim));
    let mut holders = vec![Holder::Alice; a_in.len()];
    holders.extend(vec![Holder::Bob; b_in.len()]);
    holders.push(Holder::Reference);
    let system = RegisterSystem::new(regs, holders)?;
    let mut amps = vec![ZERO; system.total_dim()];
    for (k, &(x, y)) in support.iter().enumerate() {
        let idx = (x * db + y) * rdim + k;
        amps[idx] = C64::new(dist.p(x, y).sqrt(), 0.0);
    }
    Ok(StateVector::from_parts(system, amps))
}
