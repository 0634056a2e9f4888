//! Small dense linear-algebra helpers shared by the state, estimation and
//! precision modules. Everything is built on `nalgebra` dynamic matrices.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = hermitian_part(m);
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues in descending order.
pub fn symmetric_eigen(m: &RMatrix) -> (Vec<f64>, RMatrix) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = RMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().sum()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product of two row vectors stored as slices.
pub fn kron_row(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Matrix of independent standard complex Gaussians (real and imaginary parts
/// each N(0,1)). Real parts and imaginary parts are drawn alternately in
/// column-major order.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        data.push(C64::new(re, im));
    }
    CMatrix::from_vec(rows, cols, data)
}

/// Haar-random unitary of size `n` (QR of a Ginibre matrix with the phase of
/// R's diagonal absorbed into Q).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let z = complex_gaussian(n, n, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Orthonormalize the columns of `m` (thin QR).
pub fn orthonormal_columns(m: &CMatrix) -> CMatrix {
    m.clone().qr().q()
}

/// Stack the real and imaginary parts of `vec(c)` (column-major) into one
/// real vector of length `2 * rows * cols`.
pub fn realify(c: &CMatrix) -> DVector<f64> {
    let n = c.len();
    DVector::from_fn(2 * n, |i, _| if i < n { c[i].re } else { c[i - n].im })
}

/// Inverse of [`realify`].
pub fn complexify(x: &[f64], rows: usize, cols: usize) -> CMatrix {
    let n = rows * cols;
    debug_assert_eq!(x.len(), 2 * n);
    CMatrix::from_fn(rows, cols, |r, c| {
        let i = c * rows + r;
        C64::new(x[i], x[n + i])
    })
}
