//! ℓp leverage scores from an ℓ2 well-conditioned basis.

use nalgebra::DMatrix;

use crate::error::{Result, SketchError};
use crate::linalg::{check_p, lp_norm, RMat};
use crate::rng::{normal, rng_from_seed};
use crate::sampling::ScoreVector;

/// Rows of the Gaussian embedding used before QR, as a multiple of the
/// column count.
const EMBED_FACTOR: usize = 12;

/// Matrices with at most this many rows per column are factored directly,
/// which gives exact ℓ2 leverage.
const DIRECT_FACTOR: usize = 64;

/// `‖U_i‖_p^p` for `U = M·R⁻¹`, where `R` comes from a QR of a Gaussian
/// embedding of `M`. Falls back to the pseudoinverse when `R` is singular.
pub fn lp_leverage_scores(m: &RMat, p: f64, seed: u64) -> Result<ScoreVector> {
    check_p(p)?;
    if p.is_infinite() {
        return Err(SketchError::invalid("lp leverage scores need finite p"));
    }
    let (n, d) = m.shape();
    if n == 0 || d == 0 {
        return Err(SketchError::invalid("empty matrix"));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(SketchError::invalid("matrix has non-finite entries"));
    }
    let k = EMBED_FACTOR * d;
    let embedded = if n <= DIRECT_FACTOR * d {
        m.clone()
    } else {
        let mut rng = rng_from_seed(seed);
        let s = DMatrix::from_fn(k, n, |_, _| normal(&mut rng) / (k as f64).sqrt());
        s * m
    };
    let basis = if embedded.nrows() >= d {
        let r = embedded.clone().qr().r();
        let top = r.diagonal().amax();
        let tiny = top * 1e-12 * (n.max(d) as f64);
        if top > 0.0 && r.diagonal().iter().all(|v| v.abs() > tiny) {
            let rinv = r.try_inverse().ok_or_else(|| SketchError::RankDeficient("triangular factor".into()))?;
            Some(m * rinv)
        } else {
            None
        }
    } else {
        None
    };
    let u = match basis {
        Some(u) => u,
        None => {
            // orthonormal basis of the column span through the SVD
            let svd = m.clone().svd(true, false);
            let top = svd.singular_values.max();
            let tol = top * 1e-12 * (n.max(d) as f64);
            let u = svd.u.expect("requested");
            let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol).collect();
            u.select_columns(&keep)
        }
    };
    Ok((0..n)
        .map(|i| {
            let row: Vec<f64> = u.row(i).iter().copied().collect();
            lp_norm(&row, p).powf(p)
        })
        .collect())
}

/// Threshold `γ = d^{−1/q−1}` with `1/p + 1/q = 1`.
pub fn heavy_threshold(d: usize, p: f64) -> f64 {
    let inv_q = 1.0 - 1.0 / p;
    (d as f64).powf(-inv_q - 1.0)
}

/// A pair `(2i, 2i+1)` is heavy iff either row's score is at least `γ`.
/// Returns one flag per pair.
pub fn classify_pairs(scores: &[f64], d: usize, p: f64) -> Result<Vec<bool>> {
    if scores.len() % 2 != 0 {
        return Err(SketchError::invalid("score vector has odd length"));
    }
    let gamma = heavy_threshold(d, p);
    Ok(scores.chunks_exact(2).map(|s| s[0] >= gamma || s[1] >= gamma).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_p2_scores_are_leverage() {
        let mut rng = rng_from_seed(1);
        let a = RMat::from_fn(30, 3, |_, _| normal(&mut rng));
        let q = a.clone().qr().q();
        let s = lp_leverage_scores(&q, 2.0, 0).unwrap();
        assert!((s.iter().sum::<f64>() - 3.0).abs() < 1e-10);
        for (i, v) in s.iter().enumerate() {
            assert!((v - q.row(i).norm_squared()).abs() < 1e-12);
        }
    }

    #[test]
    fn tall_matrices_use_the_embedding() {
        let mut rng = rng_from_seed(7);
        let a = RMat::from_fn(2000, 3, |_, _| normal(&mut rng));
        let s = lp_leverage_scores(&a, 2.0, 1).unwrap();
        let total: f64 = s.iter().sum();
        assert!(total > 0.5 * 3.0 && total < 2.0 * 3.0, "{total}");
    }

    #[test]
    fn diagonal_scores_concentrate_on_large_rows() {
        let mut m = RMat::zeros(40, 2);
        m[(0, 0)] = 1e3;
        m[(1, 1)] = 1e3;
        for i in 2..40 {
            m[(i, i % 2)] = 1.0;
        }
        let s = lp_leverage_scores(&m, 1.0, 3).unwrap();
        let total: f64 = s.iter().sum();
        assert!((s[0] + s[1]) / total > 0.9);
    }

    #[test]
    fn rank_deficient_uses_pseudoinverse() {
        let m = RMat::from_fn(20, 3, |i, j| if j == 2 { i as f64 } else { (i + j) as f64 });
        let s = lp_leverage_scores(&m, 2.0, 4).unwrap();
        assert!((s.iter().sum::<f64>() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn threshold_and_classification() {
        assert!((heavy_threshold(7, 1.0) - 1.0 / 7.0).abs() < 1e-15);
        assert!((heavy_threshold(4, 2.0) - 4f64.powf(-1.5)).abs() < 1e-15);
        let equal = vec![0.25; 8];
        assert_eq!(classify_pairs(&equal, 2, 1.0).unwrap(), vec![false; 4]);
        assert_eq!(classify_pairs(&equal, 4, 1.0).unwrap(), vec![true; 4]);
        let planted = [0.01, 0.9, 0.01, 0.01];
        assert_eq!(classify_pairs(&planted, 3, 1.0).unwrap(), vec![true, false]);
        assert!(classify_pairs(&[0.1; 3], 3, 1.0).is_err());
    }
}
