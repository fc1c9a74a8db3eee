//! Hybrid deterministic/random row selection (LS-Det).
//!
//! Rows whose leverage score reaches a threshold are kept exactly; the
//! remaining rows are sampled.

use crate::error::{Result, SketchError};
use crate::linalg::{CMat, RMat};
use crate::sampling::{
    apply_sketch, draw, exact_leverage_scores, gram_t, leverage_scores_real, SamplingSketch,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RemainderMode {
    Uniform,
    Leverage,
}

#[derive(Clone, Copy, Debug)]
pub struct HybridParams {
    pub rounds: usize,
    pub threshold: f64,
    pub samples: usize,
    pub remainder_mode: RemainderMode,
    /// Maximum rows moved per round; `None` means `2·d`.
    pub round_cap: Option<usize>,
}

impl HybridParams {
    pub fn new(samples: usize) -> Self {
        Self {
            rounds: 1,
            threshold: 0.5,
            samples,
            remainder_mode: RemainderMode::Leverage,
            round_cap: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HybridPlan {
    /// Deterministically kept rows, in selection order.
    pub deterministic_rows: Vec<usize>,
    /// Picks over the remainder, indexed in the original row space.
    pub sampled: SamplingSketch,
    pub rounds: usize,
    pub threshold: f64,
    pub remainder_mode: RemainderMode,
    /// Set when the rounds ended with heavy rows still in the remainder, or
    /// nothing was left to sample.
    pub saturated: bool,
}

fn check_params(p: &HybridParams) -> Result<()> {
    if p.rounds == 0 {
        return Err(SketchError::invalid("LS-Det needs at least one round"));
    }
    if !(p.threshold > 0.0) {
        return Err(SketchError::invalid("LS-Det threshold must be positive"));
    }
    if p.samples == 0 {
        return Err(SketchError::invalid("LS-Det needs at least one sampled row"));
    }
    Ok(())
}

/// Generic driver shared by the complex and real front ends; `scores` maps a
/// set of remaining row indices to their leverage scores within that subset.
fn plan_with(
    n: usize,
    d: usize,
    p: &HybridParams,
    seed: u64,
    mut scores: impl FnMut(&[usize]) -> Result<Vec<f64>>,
) -> Result<HybridPlan> {
    check_params(p)?;
    let cap = p.round_cap.unwrap_or(2 * d).max(1);
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut kept = Vec::new();
    let mut saturated = false;
    let mut last_scores = None;
    for round in 0..p.rounds {
        if remaining.is_empty() {
            break;
        }
        let s = scores(&remaining)?;
        let mut heavy: Vec<usize> = (0..remaining.len()).filter(|&k| s[k] >= p.threshold).collect();
        if heavy.is_empty() {
            last_scores = Some(s);
            break;
        }
        heavy.sort_by(|&x, &y| s[y].total_cmp(&s[x]).then(x.cmp(&y)));
        let overflow = heavy.len() > cap;
        heavy.truncate(cap);
        let mut mark = vec![false; remaining.len()];
        for &k in &heavy {
            mark[k] = true;
            kept.push(remaining[k]);
        }
        remaining = remaining.iter().zip(&mark).filter(|(_, &m)| !m).map(|(&i, _)| i).collect();
        if overflow && round + 1 == p.rounds {
            saturated = true;
        }
    }
    if remaining.is_empty() {
        saturated = true;
        return Ok(HybridPlan {
            deterministic_rows: kept,
            sampled: SamplingSketch { source_rows: n, picks: vec![] },
            rounds: p.rounds,
            threshold: p.threshold,
            remainder_mode: p.remainder_mode,
            saturated,
        });
    }
    let weights = match p.remainder_mode {
        RemainderMode::Uniform => vec![1.0; remaining.len()],
        RemainderMode::Leverage => {
            let s = match last_scores {
                Some(s) => s,
                None => scores(&remaining)?,
            };
            if s.iter().sum::<f64>() > 0.0 {
                s
            } else {
                vec![1.0; remaining.len()]
            }
        }
    };
    let picks = draw(&weights, p.samples, seed)
        .into_iter()
        .map(|(k, w)| (remaining[k], w))
        .collect();
    Ok(HybridPlan {
        deterministic_rows: kept,
        sampled: SamplingSketch { source_rows: n, picks },
        rounds: p.rounds,
        threshold: p.threshold,
        remainder_mode: p.remainder_mode,
        saturated,
    })
}

/// Builds an LS-Det plan for a complex matrix.
pub fn ls_det_sample(b: &CMat, params: &HybridParams, seed: u64) -> Result<HybridPlan> {
    plan_with(b.rows(), b.cols(), params, seed, |rows| exact_leverage_scores(&b.select_rows(rows)))
}

/// Builds an LS-Det plan for a real matrix (the optimizer hot path).
pub fn ls_det_sample_real(m: &RMat, params: &HybridParams, seed: u64) -> Result<HybridPlan> {
    plan_with(m.nrows(), m.ncols(), params, seed, |rows| leverage_scores_real(&m.select_rows(rows)))
}

/// `Σ_{i∈E} B_iᵀB_i + CᵀC` with `C` the sampled remainder.
pub fn hybrid_gram(plan: &HybridPlan, b: &CMat) -> Result<CMat> {
    let exact = gram_t(&b.select_rows(&plan.deterministic_rows));
    let sampled = gram_t(&apply_sketch(&plan.sampled, b)?);
    exact.add(&sampled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::rng::{normal, rng_from_seed};
    use crate::sampling::build_sampling_sketch;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> CMat {
        let mut rng = rng_from_seed(seed);
        CMat::from_fn(rows, cols, |_, _| c(normal(&mut rng), 0.0))
    }

    #[test]
    fn identity_is_fully_deterministic() {
        let plan = ls_det_sample(&CMat::identity(4), &HybridParams::new(3), 0).unwrap();
        let mut e = plan.deterministic_rows.clone();
        e.sort();
        assert_eq!(e, vec![0, 1, 2, 3]);
        assert!(plan.sampled.is_empty());
        assert!(plan.saturated);
        let g = hybrid_gram(&plan, &CMat::identity(4)).unwrap();
        assert!(g.sub(&CMat::identity(4)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn huge_row_is_kept() {
        let mut b = gaussian(101, 3, 1);
        for j in 0..3 {
            b[(100, j)] = c(1e6 * (j as f64 + 1.0), 0.0);
        }
        let mut p = HybridParams::new(10);
        p.threshold = 0.9;
        let plan = ls_det_sample(&b, &p, 2).unwrap();
        assert!(plan.deterministic_rows.contains(&100));
        assert!(plan.sampled.picks.iter().all(|&(i, _)| !plan.deterministic_rows.contains(&i)));
    }

    #[test]
    fn threshold_above_one_is_pure_sampling() {
        let b = gaussian(30, 3, 3);
        let mut p = HybridParams::new(12);
        p.threshold = 1.0 + 1e-6;
        let plan = ls_det_sample(&b, &p, 4).unwrap();
        assert!(plan.deterministic_rows.is_empty());
        let lev = exact_leverage_scores(&b).unwrap();
        let probs: Vec<f64> = lev.iter().map(|l| l / 3.0).collect();
        let plain = build_sampling_sketch(&probs, 12, 4).unwrap();
        let g1 = hybrid_gram(&plan, &b).unwrap();
        let g2 = gram_t(&apply_sketch(&plain, &b).unwrap());
        assert!(g1.sub(&g2).unwrap().max_abs() < 1e-9 * g2.max_abs());
    }

    #[test]
    fn uniform_remainder_weights() {
        let b = gaussian(40, 2, 5);
        let mut p = HybridParams::new(8);
        p.remainder_mode = RemainderMode::Uniform;
        p.threshold = 2.0;
        let plan = ls_det_sample(&b, &p, 6).unwrap();
        for &(_, w) in &plan.sampled.picks {
            assert!((w - (40.0f64 / 8.0).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_part_independent_of_seed() {
        let mut b = gaussian(60, 3, 7);
        for j in 0..3 {
            b[(5, j)] = c(500.0, 0.0);
            b[(17, j)] = c(-300.0 * j as f64, 1.0);
        }
        let p = HybridParams::new(10);
        let e0 = ls_det_sample(&b, &p, 0).unwrap().deterministic_rows;
        for seed in 1..5 {
            assert_eq!(ls_det_sample(&b, &p, seed).unwrap().deterministic_rows, e0);
        }
    }

    #[test]
    fn cap_limits_each_round() {
        let mut p = HybridParams::new(2);
        p.round_cap = Some(2);
        let plan = ls_det_sample(&CMat::identity(5), &p, 0).unwrap();
        assert_eq!(plan.deterministic_rows.len(), 2);
        assert!(plan.saturated);
        p.rounds = 3;
        let plan = ls_det_sample(&CMat::identity(5), &p, 0).unwrap();
        assert_eq!(plan.deterministic_rows.len(), 5);
    }
}
