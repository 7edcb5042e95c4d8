//! Entropic quantities and distances, in bits.
//!
//! Entropy of a reduction is computed from its spectrum. For pure states the
//! spectrum is taken on whichever side of the cut is smaller, since both
//! sides share their nonzero eigenvalues.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::hilbert::{DensityOperator, RegisterSystem, StateVector};
use crate::linalg;
use crate::Tolerances;

/// Anything whose reductions have a computable spectrum.
pub trait QuantumState {
    fn system(&self) -> &RegisterSystem;

    /// Eigenvalues of the reduction onto `subsystem`, possibly missing
    /// zeros.
    fn subsystem_spectrum(&self, subsystem: &[String]) -> Result<Vec<f64>>;
}

impl QuantumState for StateVector {
    fn system(&self) -> &RegisterSystem {
        StateVector::system(self)
    }

    fn subsystem_spectrum(&self, subsystem: &[String]) -> Result<Vec<f64>> {
        self.system().positions(subsystem)?;
        if subsystem.is_empty() || subsystem.len() == self.system().len() {
            // Trivial cut: the spectrum of a pure state (or of the scalar 1)
            // after tracing everything or nothing.
            return Ok(vec![self.norm().powi(2)]);
        }
        self.reduced_spectrum(subsystem)
    }
}

impl QuantumState for DensityOperator {
    fn system(&self) -> &RegisterSystem {
        DensityOperator::system(self)
    }

    fn subsystem_spectrum(&self, subsystem: &[String]) -> Result<Vec<f64>> {
        if subsystem.is_empty() {
            return Ok(vec![self.trace()]);
        }
        Ok(self.reduced_density(subsystem)?.eigenvalues())
    }
}

/// Entropy of a subsystem together with the data it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub value: f64,
    pub subsystem: Vec<String>,
    /// Smallest eigenvalue kept after clamping (zero if any was clamped).
    pub spectrum_floor: f64,
}

fn to_names<S: AsRef<str>>(names: &[S]) -> Vec<String> {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

/// Clamps rounding noise in a spectrum: entries in `[-psd, 0)` become 0,
/// anything below `-psd` is an error.
pub fn clamp_spectrum(spectrum: &[f64], psd: f64) -> Result<Vec<f64>> {
    spectrum
        .iter()
        .map(|&l| {
            if l < -psd {
                Err(Error::InvalidState(format!("eigenvalue {l:.3e} below tolerance")))
            } else {
                Ok(l.max(0.0))
            }
        })
        .collect()
}

pub fn entropy_report<Q: QuantumState + ?Sized, S: AsRef<str>>(
    s: &Q,
    subsystem: &[S],
    tol: &Tolerances,
) -> Result<EntropyReport> {
    let names = to_names(subsystem);
    let spec = clamp_spectrum(&s.subsystem_spectrum(&names)?, tol.psd)?;
    let floor = spec.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(EntropyReport {
        value: linalg::shannon_bits(spec.iter().copied()),
        subsystem: names,
        spectrum_floor: if floor.is_finite() { floor } else { 0.0 },
    })
}

/// Von Neumann entropy `H(S) = -Tr ρ_S log2 ρ_S`.
pub fn entropy<Q: QuantumState + ?Sized, S: AsRef<str>>(s: &Q, subsystem: &[S]) -> Result<f64> {
    entropy_report(s, subsystem, &Tolerances::default()).map(|r| r.value)
}

fn check_disjoint(groups: &[&[String]], system: &RegisterSystem) -> Result<()> {
    let mut seen = HashSet::new();
    for g in groups {
        for n in g.iter() {
            if !system.contains(n) {
                return Err(Error::UnknownRegister(n.clone()));
            }
            if !seen.insert(n.as_str()) {
                return Err(Error::Overlap(n.clone()));
            }
        }
    }
    Ok(())
}

fn union(parts: &[&[String]]) -> Vec<String> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

/// `I(A;B|C) = H(AC) + H(BC) - H(C) - H(ABC)`.
pub fn cond_mutual_info<Q: QuantumState + ?Sized, S: AsRef<str>>(
    s: &Q,
    a: &[S],
    b: &[S],
    c: &[S],
) -> Result<f64> {
    cond_mutual_info_with(s, a, b, c, &Tolerances::default())
}

pub fn cond_mutual_info_with<Q: QuantumState + ?Sized, S: AsRef<str>>(
    s: &Q,
    a: &[S],
    b: &[S],
    c: &[S],
    tol: &Tolerances,
) -> Result<f64> {
    let (a, b, c) = (to_names(a), to_names(b), to_names(c));
    check_disjoint(&[&a, &b, &c], s.system())?;
    let h = |names: Vec<String>| entropy_report(s, &names, tol).map(|r| r.value);
    Ok(h(union(&[&a, &c]))? + h(union(&[&b, &c]))? - h(c.clone())? - h(union(&[&a, &b, &c]))?)
}

/// `I(A;B) = H(A) + H(B) - H(AB)`.
pub fn mutual_info<Q: QuantumState + ?Sized, S: AsRef<str>>(s: &Q, a: &[S], b: &[S]) -> Result<f64> {
    let empty: [&str; 0] = [];
    cond_mutual_info(s, &to_names(a), &to_names(b), &to_names(&empty))
}

/// `H(A|B) = H(AB) - H(B)`.
pub fn cond_entropy<Q: QuantumState + ?Sized, S: AsRef<str>>(s: &Q, a: &[S], b: &[S]) -> Result<f64> {
    let (a, b) = (to_names(a), to_names(b));
    check_disjoint(&[&a, &b], s.system())?;
    Ok(entropy(s, &union(&[&a, &b]))? - entropy(s, &b)?)
}

/// Trace norm of `ρ1 - ρ2` after reducing both onto `subsystem`.
pub fn trace_distance<S: AsRef<str>>(
    rho1: &DensityOperator,
    rho2: &DensityOperator,
    subsystem: &[S],
) -> Result<f64> {
    let r1 = rho1.reduced_density(subsystem)?;
    let r2 = rho2.reduced_density(subsystem)?;
    if r1.system().registers() != r2.system().registers() {
        return Err(Error::DimMismatch("states reduce to different register systems".into()));
    }
    let diff = r1.matrix() - r2.matrix();
    Ok(linalg::hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum())
}

/// Trace distance over the full system, after putting `rho2` in `rho1`'s
/// register order.
pub fn trace_distance_full(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    let names = rho1.system().names();
    let r2 = rho2.permute(&names).map_err(|_| {
        Error::DimMismatch("states live on different register sets".into())
    })?;
    trace_distance(rho1, &r2, &names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{Holder, Register};
    use crate::linalg::CMatrix;
    use crate::C64;
    use nalgebra::DVector;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn qubits(names: &[&str]) -> RegisterSystem {
        RegisterSystem::uniform(names.iter().map(|n| Register::new(*n, 2)).collect(), Holder::Alice).unwrap()
    }

    fn bell() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(qubits(&["a", "b"]), vec![c(h), c(0.0), c(0.0), c(h)]).unwrap()
    }

    fn ghz() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![c(0.0); 8];
        v[0] = c(h);
        v[7] = c(h);
        StateVector::new(qubits(&["a", "b", "c"]), v).unwrap()
    }

    #[test]
    fn pure_state_has_zero_entropy() {
        assert!(entropy(&bell(), &["a", "b"]).unwrap().abs() < 1e-12);
        assert!(entropy(&bell().density(), &["a", "b"]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_entropy() {
        for d in [2usize, 3, 5] {
            let rho = DensityOperator::maximally_mixed(
                RegisterSystem::uniform(vec![Register::new("x", d)], Holder::Bob).unwrap(),
            );
            assert!((entropy(&rho, &["x"]).unwrap() - (d as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_entropy_value() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(0.25), c(0.75)]));
        let rho = DensityOperator::new(qubits(&["a"]), m).unwrap();
        // -(1/4) log2(1/4) - (3/4) log2(3/4)
        let oracle = -(0.25f64 * 0.25f64.log2()) - 0.75 * 0.75f64.log2();
        let h = entropy(&rho, &["a"]).unwrap();
        assert!((h - oracle).abs() < 1e-12);
        assert!((h - 0.811278).abs() < 1e-6);
    }

    #[test]
    fn bell_mutual_information_is_two() {
        assert!((mutual_info(&bell(), &["a"], &["b"]).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn ghz_conditional_mutual_information_is_one() {
        // H(AC) = 1, H(BC) = 1, H(C) = 1, H(ABC) = 0.
        assert!((cond_mutual_info(&ghz(), &["a"], &["b"], &["c"]).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn product_state_has_no_cmi() {
        let s = bell()
            .tensor(&StateVector::zeros(qubits(&["c"])))
            .unwrap();
        let v = cond_mutual_info(&s, &["a", "b"], &["c"], &[] as &[&str]).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn overlapping_sets_rejected() {
        let r = cond_mutual_info(&ghz(), &["a"], &["a"], &["c"]);
        assert!(matches!(r, Err(Error::Overlap(_))));
    }

    #[test]
    fn conditional_entropy_can_be_negative() {
        assert!((cond_entropy(&bell(), &["a"], &["b"]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let zero = StateVector::zeros(qubits(&["a"])).density();
        let one = StateVector::basis(qubits(&["a"]), &[1]).unwrap().density();
        let plus = StateVector::new(qubits(&["a"]), vec![c(h), c(h)]).unwrap().density();
        assert!(trace_distance(&zero, &zero, &["a"]).unwrap().abs() < 1e-15);
        assert!((trace_distance(&zero, &one, &["a"]).unwrap() - 2.0).abs() < 1e-12);
        // Difference has eigenvalues ±sqrt(1/2).
        assert!((trace_distance(&zero, &plus, &["a"]).unwrap() - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_system_mismatch() {
        let a = StateVector::zeros(qubits(&["a"])).density();
        let b = StateVector::zeros(qubits(&["b"])).density();
        assert!(trace_distance_full(&a, &b).is_err());
    }

    #[test]
    fn negative_spectrum_is_rejected() {
        assert!(clamp_spectrum(&[0.5, -1e-12], 1e-9).is_ok());
        assert!(clamp_spectrum(&[0.5, -1e-6], 1e-9).is_err());
    }
}
