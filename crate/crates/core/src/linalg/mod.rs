//! Dense complex linear algebra, complex → real lifting, and the mixed norm.

mod complex;
mod factor;
mod lift;

pub use complex::{CMat, CScalar, CVec, RMat};
pub(crate) use complex::c;
pub use factor::{
    default_rank_tol, is_hermitian, min_eig_hermitian, min_eig_hermitian_tol, pinv, qr,
    spectral_norm, svd, Svd, HERMITIAN_TOL,
};
pub(crate) use lift::check_p;
pub use lift::{lift_matrix, lift_scalar, lp_norm, mixed_norm, pair_norms, phi, unphi};

/// Spectral norm of a real matrix.
pub fn spectral_norm_real(m: &RMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Smallest eigenvalue of a real symmetric matrix (symmetrized first).
pub fn min_eig_symmetric(m: &RMat) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}
