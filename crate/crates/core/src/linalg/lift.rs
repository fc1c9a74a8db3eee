//! Complex → real lifting and the mixed (p,2)-norm.
//!
//! A complex scalar `c + di` lifts to the 2×2 block `[[c, −d], [d, c]]` and a
//! complex vector to its interleaved `(re, im)` pairs. With this convention
//! `lift(y)·phi(x) = phi(y·x)`, so `⦀lift(A)·phi(x) − phi(b)⦀_{p,2} = ‖Ax − b‖_p`
//! holds for every complex `x`, `b` without conjugation.

use crate::error::{Result, SketchError};
use crate::linalg::complex::{c, CMat, CScalar, CVec, RMat};

pub fn lift_scalar(z: CScalar) -> [[f64; 2]; 2] {
    [[z.re, -z.im], [z.im, z.re]]
}

pub fn phi(v: &CVec) -> Vec<f64> {
    v.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn unphi(y: &[f64]) -> Result<CVec> {
    if y.len() % 2 != 0 {
        return Err(SketchError::invalid(format!("unphi needs even length, got {}", y.len())));
    }
    Ok(CVec::new(y.chunks_exact(2).map(|p| c(p[0], p[1])).collect()))
}

/// Lifts `A ∈ C^{n×d}` to the real `2n × 2d` matrix whose (i, j) block is
/// `lift_scalar(A_ij)`.
pub fn lift_matrix(a: &CMat) -> RMat {
    let mut out = RMat::zeros(2 * a.rows(), 2 * a.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let blk = lift_scalar(a[(i, j)]);
            for r in 0..2 {
                for s in 0..2 {
                    out[(2 * i + r, 2 * j + s)] = blk[r][s];
                }
            }
        }
    }
    out
}

/// Per-pair Euclidean norms of an even-length vector.
pub fn pair_norms(y: &[f64]) -> Result<Vec<f64>> {
    if y.len() % 2 != 0 {
        return Err(SketchError::invalid(format!(
            "mixed norm needs even length, got {}",
            y.len()
        )));
    }
    Ok(y.chunks_exact(2).map(|p| p[0].hypot(p[1])).collect())
}

/// ℓp norm of a nonnegative real vector, `p ∈ [1, ∞]`.
pub fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().map(|x| x.abs()).fold(0.0, f64::max)
    } else if p == 1.0 {
        v.iter().map(|x| x.abs()).sum()
    } else if p == 2.0 {
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    } else {
        // scale by the max entry so large p does not overflow
        let m = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(SketchError::invalid(format!("norm order must be in [1, inf], got {p}")));
    }
    Ok(())
}

/// `⦀y⦀_{p,2}`: the ℓp norm of the vector of per-pair Euclidean norms.
pub fn mixed_norm(y: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(lp_norm(&pair_norms(y)?, p))
}
