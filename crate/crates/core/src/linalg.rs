//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::C64;

pub type CMatrix = DMatrix<C64>;

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Kronecker product `a ⊗ b` (left factor most significant).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entrywise modulus of `U^dagger U - I`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let p = u.adjoint() * u;
    let n = p.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Largest entrywise modulus of `A - A^dagger`.
pub fn hermiticity_deviation(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

/// Symmetrised copy `(A + A^dagger)/2`, removing rounding asymmetry before
/// a Hermitian eigensolve.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    if a.nrows() == 1 {
        return vec![a[(0, 0)].re];
    }
    let h = hermitian_part(a);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Eigen-decomposition of a Hermitian matrix: eigenvalues (ascending) with
/// eigenvectors as matching columns.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = hermitian_part(a);
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Gram matrix `G = M M^dagger` for `M` stored row-major as `rows x cols`.
///
/// Rows are processed in parallel; only the upper triangle is computed.
pub fn gram_rows(data: &[C64], rows: usize, cols: usize) -> CMatrix {
    debug_assert_eq!(data.len(), rows * cols);
    let upper: Vec<Vec<C64>> = (0..rows)
        .into_par_iter()
        .map(|a| {
            let ra = &data[a * cols..(a + 1) * cols];
            (a..rows)
                .map(|b| {
                    let rb = &data[b * cols..(b + 1) * cols];
                    let mut acc = C64::new(0.0, 0.0);
                    for (x, y) in ra.iter().zip(rb) {
                        acc += x * y.conj();
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut g = CMatrix::zeros(rows, rows);
    for (a, row) in upper.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            let b = a + k;
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    g
}

/// Transposed Gram `G = M^T conj(M)`, i.e. `(M^dagger M)^T`, which shares the
/// nonzero spectrum of `M M^dagger`.
pub fn gram_cols(data: &[C64], rows: usize, cols: usize) -> CMatrix {
    let mut t = vec![C64::new(0.0, 0.0); data.len()];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = data[r * cols + c];
        }
    }
    gram_rows(&t, cols, rows)
}

/// `-Σ λ log2 λ` with `0 log 0 = 0`. Eigenvalues must already be clamped.
pub fn shannon_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}
