use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::register::Register;
use super::unitary::UnitaryOp;
use crate::linalg::CMatrix;
use crate::C64;

/// Seeded generator used for every randomised routine in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex standard Gaussian with `E|z|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal moved into `Q`.
pub fn haar_unitary_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n > 0.0 { rjj / n } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-random unitary on a single register `q` of dimension `d`,
/// deterministic in `seed`.
pub fn haar_random_unitary(d: usize, seed: u64) -> UnitaryOp {
    assert!(d >= 1, "dimension must be positive");
    let mut rng = rng_from_seed(seed);
    let m = haar_unitary_matrix(d, &mut rng);
    let reg = Register::new("q", d);
    UnitaryOp::unchecked(vec![reg.clone()], vec![reg], m).expect("square by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn haar_is_unitary() {
        for d in [1, 2, 3, 5, 8] {
            let u = haar_random_unitary(d, 11);
            let p = u.matrix() * u.matrix().adjoint();
            assert!((p - linalg::identity(d)).camax() < 1e-10);
            for j in 0..d {
                let n: f64 = u.matrix().column(j).iter().map(|x| x.norm_sqr()).sum();
                assert!((n.sqrt() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn haar_is_deterministic() {
        assert_eq!(haar_random_unitary(4, 99), haar_random_unitary(4, 99));
        assert_ne!(haar_random_unitary(4, 99), haar_random_unitary(4, 100));
    }
}
