//! Block-diagonal Gaussian sketches aligned with coordinate pairs.

use statrs::function::gamma::gamma;

use crate::error::{Result, SketchError};
use crate::linalg::{check_p, RMat};
use crate::rng::{derive_seed, normal, rng_from_seed};

/// Largest `s` accepted by [`build_sketch_inf`]; each block has `2^s` rows.
pub const MAX_SIGN_BITS: usize = 20;

/// Entry standard deviation making `E|⟨g, y⟩|^p = ‖y‖₂^p` for `g` Gaussian in `R²`.
pub fn sigma_p(p: f64) -> f64 {
    let moment = std::f64::consts::PI.sqrt() / (2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0));
    moment.powf(1.0 / p)
}

/// One real block per pair; block `i` acts on lifted rows `2i, 2i+1`.
#[derive(Clone, Debug)]
pub struct BlockSketch {
    pub blocks: Vec<RMat>,
    pub heavy: Vec<bool>,
}

impl BlockSketch {
    pub fn pairs(&self) -> usize {
        self.blocks.len()
    }

    pub fn output_rows(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    /// The full block-diagonal matrix (`output_rows × 2·pairs`).
    pub fn assemble(&self) -> RMat {
        let mut g = RMat::zeros(self.output_rows(), 2 * self.pairs());
        let mut r0 = 0;
        for (i, b) in self.blocks.iter().enumerate() {
            g.view_mut((r0, 2 * i), (b.nrows(), 2)).copy_from(b);
            r0 += b.nrows();
        }
        g
    }

    /// `G·M` for a matrix with `2·pairs` rows, block by block.
    pub fn apply(&self, m: &RMat) -> Result<RMat> {
        if m.nrows() != 2 * self.pairs() {
            return Err(SketchError::invalid(format!(
                "sketch expects {} rows, got {}",
                2 * self.pairs(),
                m.nrows()
            )));
        }
        let mut out = RMat::zeros(self.output_rows(), m.ncols());
        let mut r0 = 0;
        for (i, b) in self.blocks.iter().enumerate() {
            let part = b * m.rows(2 * i, 2);
            out.view_mut((r0, 0), (b.nrows(), m.ncols())).copy_from(&part);
            r0 += b.nrows();
        }
        Ok(out)
    }

    pub fn apply_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let m = RMat::from_column_slice(v.len(), 1, v);
        Ok(self.apply(&m)?.iter().copied().collect())
    }
}

/// Gaussian rows for pair `i`. Rows are drawn in order from a per-pair
/// stream, so the first rows agree across different block heights.
fn gaussian_block(seed: u64, pair: usize, rows: usize, std: f64) -> RMat {
    let mut rng = rng_from_seed(derive_seed(seed, pair as u64));
    let mut b = RMat::zeros(rows, 2);
    for r in 0..rows {
        b[(r, 0)] = std * normal(&mut rng);
        b[(r, 1)] = std * normal(&mut rng);
    }
    b
}

/// Finite-`p` sketch: heavy pairs get `t×2` blocks scaled by `t^{-1/p}`,
/// light pairs a single row.
pub fn build_sketch_finite_p(heavy: &[bool], t: usize, p: f64, seed: u64) -> Result<BlockSketch> {
    check_p(p)?;
    if p.is_infinite() {
        return Err(SketchError::invalid("finite-p sketch called with p = inf"));
    }
    if t == 0 {
        return Err(SketchError::invalid("heavy block height must be at least 1"));
    }
    let sigma = sigma_p(p);
    let heavy_std = sigma * (t as f64).powf(-1.0 / p);
    let blocks = heavy
        .iter()
        .enumerate()
        .map(|(i, &h)| if h { gaussian_block(seed, i, t, heavy_std) } else { gaussian_block(seed, i, 1, sigma) })
        .collect();
    Ok(BlockSketch { blocks, heavy: heavy.to_vec() })
}

/// All `2^s` rows of `{−1, +1}^s`, so that `‖R z‖_∞ = ‖z‖₁`.
pub fn sign_enumeration(s: usize) -> Result<RMat> {
    if s == 0 || s > MAX_SIGN_BITS {
        return Err(SketchError::Budget(format!("sign enumeration needs 1 <= s <= {MAX_SIGN_BITS}, got {s}")));
    }
    let rows = 1usize << s;
    Ok(RMat::from_fn(rows, s, |r, j| if (r >> j) & 1 == 1 { -1.0 } else { 1.0 }))
}

/// `p = ∞` sketch: every pair gets `R·G` with `G ∈ R^{s×2}` drawn from
/// `N(0, π/2)/s`.
pub fn build_sketch_inf(pairs: usize, s: usize, seed: u64) -> Result<BlockSketch> {
    let r = sign_enumeration(s)?;
    let std = (std::f64::consts::FRAC_PI_2).sqrt() / s as f64;
    let blocks = (0..pairs).map(|i| &r * gaussian_block(seed, i, s, std)).collect();
    Ok(BlockSketch { blocks, heavy: vec![true; pairs] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::normal_vec;

    #[test]
    fn sigma_closed_forms() {
        assert!((sigma_p(2.0) - 1.0).abs() < 1e-14);
        assert!((sigma_p(1.0) - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sign_enumeration_is_exact() {
        assert!(sign_enumeration(0).is_err());
        assert!(matches!(sign_enumeration(21), Err(SketchError::Budget(_))));
        let mut rng = rng_from_seed(1);
        for s in 1..=6 {
            let r = sign_enumeration(s).unwrap();
            for _ in 0..50 {
                let z = RMat::from_column_slice(s, 1, &normal_vec(&mut rng, s));
                let inf = (&r * &z).amax();
                let l1: f64 = z.iter().map(|v| v.abs()).sum();
                assert_eq!(inf, l1);
            }
        }
    }

    #[test]
    fn blocks_align_with_pairs() {
        let heavy = vec![true, false, true, false];
        let g = build_sketch_finite_p(&heavy, 3, 1.0, 5).unwrap();
        assert_eq!(g.output_rows(), 8);
        let full = g.assemble();
        assert_eq!(full.shape(), (8, 8));
        // rows of the second block touch only columns 2, 3
        assert!(full.row(3).iter().enumerate().all(|(j, v)| *v == 0.0 || j == 2 || j == 3));
        let mut rng = rng_from_seed(2);
        let m = RMat::from_fn(8, 3, |_, _| normal(&mut rng));
        assert!((g.apply(&m).unwrap() - &full * &m).amax() < 1e-14);
        assert!(g.apply(&RMat::zeros(6, 1)).is_err());
    }

    #[test]
    fn taller_blocks_extend_shorter_ones() {
        let a = build_sketch_finite_p(&[true; 3], 2, 1.0, 9).unwrap();
        let b = build_sketch_finite_p(&[true; 3], 5, 1.0, 9).unwrap();
        let ratio = (5.0f64 / 2.0).powf(1.0);
        for (x, y) in a.blocks.iter().zip(&b.blocks) {
            assert!((x - y.rows(0, 2) * ratio).amax() < 1e-12);
        }
    }

    #[test]
    fn first_moment_p1() {
        let mut rng = rng_from_seed(3);
        let y = [0.6, -0.8];
        let s = sigma_p(1.0);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| (s * normal(&mut rng) * y[0] + s * normal(&mut rng) * y[1]).abs()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }
}
