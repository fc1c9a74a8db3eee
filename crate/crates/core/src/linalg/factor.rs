//! SVD, QR and Hermitian eigenvalues for [`CMat`], backed by nalgebra.

use crate::error::{Result, SketchError};
use crate::linalg::complex::CMat;

/// Default relative tolerance for Hermitian checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Thin singular value decomposition `M = U · diag(sigma) · Vstar`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub vstar: CMat,
}

impl Svd {
    /// Number of singular values above `rel_tol · sigma_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.sigma.first().copied().unwrap_or(0.0);
        self.sigma.iter().filter(|&&s| s > rel_tol * top && s > 0.0).count()
    }

    pub fn reconstruct(&self) -> CMat {
        let k = self.sigma.len();
        let scaled = CMat::from_fn(self.u.rows(), k, |i, j| self.u[(i, j)] * self.sigma[j]);
        scaled.matmul(&self.vstar).expect("svd factor shapes agree")
    }
}

/// Default cutoff used to decide numerical rank from singular values.
pub fn default_rank_tol(rows: usize, cols: usize) -> f64 {
    rows.max(cols).max(1) as f64 * f64::EPSILON * 4.0
}

pub fn svd(m: &CMat) -> Result<Svd> {
    if !m.is_finite() {
        return Err(SketchError::invalid("svd input has non-finite entries"));
    }
    let (rows, cols) = (m.rows(), m.cols());
    let k = rows.min(cols);
    if k == 0 {
        return Ok(Svd { u: CMat::zeros(rows, 0), sigma: vec![], vstar: CMat::zeros(0, cols) });
    }
    let dec = m.to_nalgebra().svd(true, true);
    let u = dec.u.expect("requested U");
    let vt = dec.v_t.expect("requested V*");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let sigma = order.iter().map(|&j| dec.singular_values[j]).collect();
    let u = CMat::from_fn(rows, k, |i, j| u[(i, order[j])]);
    let vstar = CMat::from_fn(k, cols, |i, j| vt[(order[i], j)]);
    Ok(Svd { u, sigma, vstar })
}

/// Householder QR of a tall matrix: `M = Q · R` with `Q` of orthonormal columns.
pub fn qr(m: &CMat) -> Result<(CMat, CMat)> {
    if m.rows() < m.cols() {
        return Err(SketchError::invalid(format!(
            "qr needs rows >= cols, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(SketchError::invalid("qr input has non-finite entries"));
    }
    let dec = m.to_nalgebra().qr();
    Ok((CMat::from_nalgebra(&dec.q()), CMat::from_nalgebra(&dec.r())))
}

/// Largest singular value.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    m.to_nalgebra().singular_values().iter().copied().fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    if m.rows() != m.cols() {
        return false;
    }
    let scale = m.max_abs().max(1.0);
    (0..m.rows()).all(|i| (0..=i).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= tol * scale))
}

pub fn min_eig_hermitian(m: &CMat) -> Result<f64> {
    min_eig_hermitian_tol(m, HERMITIAN_TOL)
}

/// Smallest eigenvalue of a Hermitian matrix; the input is symmetrized before
/// the eigensolve so sub-tolerance asymmetry does not leak into the result.
pub fn min_eig_hermitian_tol(m: &CMat, tol: f64) -> Result<f64> {
    if !is_hermitian(m, tol) {
        return Err(SketchError::invalid("matrix is not Hermitian within tolerance"));
    }
    if m.rows() == 0 {
        return Err(SketchError::invalid("empty matrix has no eigenvalues"));
    }
    let sym = CMat::from_fn(m.rows(), m.cols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let eig = sym.to_nalgebra().symmetric_eigenvalues();
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Moore–Penrose pseudoinverse through the SVD, zeroing singular values below
/// `rel_tol · sigma_max`.
pub fn pinv(m: &CMat, rel_tol: f64) -> Result<CMat> {
    let dec = svd(m)?;
    let r = dec.rank(rel_tol);
    // V · diag(1/sigma) · U*
    let vs = CMat::from_fn(m.cols(), r, |i, j| dec.vstar[(j, i)].conj() / dec.sigma[j]);
    let ustar = CMat::from_fn(r, m.rows(), |i, j| dec.u[(j, i)].conj());
    vs.matmul(&ustar)
}
