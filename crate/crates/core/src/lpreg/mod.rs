//! Complex ℓp regression by lifting to a real mixed-norm problem and
//! sketching it down to a small real ℓp regression.

mod scores;
mod sketch;
mod solver;

pub use scores::{classify_pairs, heavy_threshold, lp_leverage_scores};
pub use sketch::{build_sketch_finite_p, build_sketch_inf, sigma_p, sign_enumeration, BlockSketch, MAX_SIGN_BITS};
pub use solver::{grouped_lp_solve, small_lp_solve, LpSolution};

use crate::error::{Result, SketchError};
use crate::linalg::{check_p, lift_matrix, mixed_norm, phi, unphi, CMat, CVec, RMat};
use crate::rng::derive_seed;

/// `min_x ‖Ax − b‖_p` in lifted real form.
#[derive(Clone, Debug)]
pub struct LiftedRegression {
    pub ap: RMat,
    pub bp: Vec<f64>,
    /// Row pairs `(2i, 2i+1)`, one per complex row.
    pub pairs: Vec<(usize, usize)>,
}

impl LiftedRegression {
    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// Lifted residual `Ap·y − bp`.
    pub fn residual(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.ap.ncols() {
            return Err(SketchError::invalid(format!("expected {} unknowns, got {}", self.ap.ncols(), y.len())));
        }
        let r = &self.ap * RMat::from_column_slice(y.len(), 1, y);
        Ok(r.iter().zip(&self.bp).map(|(a, b)| a - b).collect())
    }

    /// `⦀Ap·phi(x) − bp⦀_{p,2}`.
    pub fn objective(&self, x: &CVec, p: f64) -> Result<f64> {
        mixed_norm(&self.residual(&phi(x))?, p)
    }

    /// Solves the unsketched lifted problem.
    pub fn solve(&self, p: f64, tol: f64) -> Result<LpSolution> {
        grouped_lp_solve(&self.ap, &self.bp, p, 2, tol)
    }
}

pub fn lift_instance(a: &CMat, b: &CVec) -> Result<LiftedRegression> {
    if a.rows() != b.len() {
        return Err(SketchError::invalid(format!("A has {} rows but b has {}", a.rows(), b.len())));
    }
    if !a.is_finite() || b.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SketchError::invalid("regression data has non-finite entries"));
    }
    Ok(LiftedRegression {
        ap: lift_matrix(a),
        bp: phi(b),
        pairs: (0..a.rows()).map(|i| (2 * i, 2 * i + 1)).collect(),
    })
}

/// Heavy-block height `max(8, ⌈4·d·log(2/ε)/ε²⌉)` used when pairs are
/// classified rather than all treated as heavy.
pub fn default_heavy_rows(d: usize, eps: f64) -> usize {
    let t = (4.0 * d as f64 * (2.0 / eps).ln() / (eps * eps)).ceil();
    (t as usize).max(8)
}

#[derive(Clone, Debug)]
pub struct SketchSolveParams {
    /// Heavy-block height `t` for finite `p`; sign-enumeration width `s` for `p = ∞`.
    pub size: usize,
    /// Treat every pair as heavy instead of classifying by ℓp leverage.
    pub all_heavy: bool,
    pub seed: u64,
    pub tol: f64,
}

impl SketchSolveParams {
    pub fn new(size: usize, seed: u64) -> Self {
        Self { size, all_heavy: true, seed, tol: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct SketchSolveResult {
    pub xhat: CVec,
    /// Objective of the sketched instance at its solution.
    pub sketched_objective: f64,
    pub converged: bool,
    pub heavy_pairs: usize,
    pub sketch_rows: usize,
}

/// Lifts, sketches and solves the reduced real ℓp problem.
pub fn sketch_and_solve(a: &CMat, b: &CVec, p: f64, params: &SketchSolveParams) -> Result<SketchSolveResult> {
    check_p(p)?;
    let lifted = lift_instance(a, b)?;
    let n = lifted.n_pairs();
    let sketch = if p.is_infinite() {
        build_sketch_inf(n, params.size, derive_seed(params.seed, 1))?
    } else {
        let heavy = if params.all_heavy {
            vec![true; n]
        } else {
            let mut ab = lifted.ap.clone().insert_column(lifted.ap.ncols(), 0.0);
            ab.column_mut(lifted.ap.ncols()).copy_from_slice(&lifted.bp);
            let scores = lp_leverage_scores(&ab, p, derive_seed(params.seed, 0))?;
            classify_pairs(&scores, ab.ncols(), p)?
        };
        build_sketch_finite_p(&heavy, params.size, p, derive_seed(params.seed, 1))?
    };
    let m = sketch.apply(&lifted.ap)?;
    let c = sketch.apply_vec(&lifted.bp)?;
    let sol = small_lp_solve(&m, &c, p, params.tol)?;
    Ok(SketchSolveResult {
        xhat: unphi(&sol.y)?,
        sketched_objective: sol.objective,
        converged: sol.converged,
        heavy_pairs: sketch.heavy.iter().filter(|h| **h).count(),
        sketch_rows: sketch.output_rows(),
    })
}
