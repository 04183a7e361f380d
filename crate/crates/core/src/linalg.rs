//! Complex dense linear-algebra helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `e_k` of length `n`.
pub fn unit(n: usize, k: usize) -> CVec {
    DVector::from_fn(n, |i, _| if i == k { real(1.0) } else { real(0.0) })
}

/// `v / ||v||`, or `None` for a zero vector.
pub fn normalized(v: &CVec) -> Option<CVec> {
    let n = v.norm();
    if n > 0.0 && n.is_finite() {
        Some(v.unscale(n))
    } else {
        None
    }
}

/// Row vector `v^H M` returned as a column vector of length `M.ncols()`.
pub fn herm_row(v: &CVec, m: &CMat) -> CVec {
    m.ad_mul(v).conjugate()
}

/// Dominant left singular vector of `m` (unit norm).
pub fn dominant_left_singular(m: &CMat) -> CVec {
    let g = m * m.adjoint();
    let eig = SymmetricEigen::new(g);
    let k = eig.eigenvalues.imax();
    let v: CVec = eig.eigenvectors.column(k).into_owned();
    normalized(&v).unwrap_or_else(|| unit(m.nrows(), 0))
}

/// Circularly-symmetric standard complex Gaussian vector.
pub fn complex_gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DVector::zeros(n);
    for i in 0..n {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        v[i] = Complex64::new(re * s, im * s);
    }
    v
}

/// Uniformly distributed unit vector in `C^n`.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    loop {
        let v = complex_gaussian_vec(rng, n);
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig_herm(m: &CMat) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}
