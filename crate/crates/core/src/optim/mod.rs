//! Sub-sampled Newton-type methods: Newton-CG, Newton-MR and trust region.

mod krylov;
mod methods;

pub use krylov::{cg_solve, cg_steihaug, minnorm_lsq, SteihaugStep};
pub use methods::{newton_cg, newton_mr, trust_region};

use std::fmt;

use crate::error::{Result, SketchError};
use crate::hybrid::{HybridPlan, RemainderMode};
use crate::problem::{FiniteSumProblem, HessianOperator, OracleMeter, SketchRef};
use crate::rng::derive_seed;
use crate::sampling::{
    draw, leverage_scores_real, normalize_or_uniform, scheme_probs_from_diag, weighted_leverage_scores,
    SamplingScheme, SamplingSketch,
};

/// How the Hessian is approximated at each outer iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HessianScheme {
    Full,
    Sampled(SamplingScheme),
    /// LS-Det: the top `round(fraction·t)` rows by leverage are kept exactly,
    /// the rest of the budget is sampled by leverage from the remaining rows.
    LsDet { fraction: f64 },
}

impl HessianScheme {
    pub fn parse(s: &str) -> Option<HessianScheme> {
        let s = s.trim();
        let sampled = |x| Some(HessianScheme::Sampled(x));
        match s {
            "Full" | "full" => Some(HessianScheme::Full),
            "Uniform" | "uniform" => sampled(SamplingScheme::Uniform),
            "LS" | "ls" => sampled(SamplingScheme::Ls),
            "RN" | "rn" => sampled(SamplingScheme::Rn),
            "LS-MX" | "ls-mx" => sampled(SamplingScheme::LsMx),
            "RN-MX" | "rn-mx" => sampled(SamplingScheme::RnMx),
            _ => {
                let inner = s.strip_prefix("LS-Det(").or_else(|| s.strip_prefix("ls-det("))?;
                let f: f64 = inner.strip_suffix(')')?.trim().parse().ok()?;
                (0.0..=1.0).contains(&f).then_some(HessianScheme::LsDet { fraction: f })
            }
        }
    }
}

impl fmt::Display for HessianScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HessianScheme::Full => write!(f, "Full"),
            HessianScheme::Sampled(s) => write!(f, "{}", s.name()),
            HessianScheme::LsDet { fraction } => write!(f, "LS-Det({fraction})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptConfig {
    pub scheme: HessianScheme,
    pub sample_size: usize,
    pub max_outer: usize,
    pub max_oracle_calls: f64,
    pub inner_cap: usize,
    pub inner_tol: f64,
    pub line_search_rho: f64,
    pub max_halvings: usize,
    pub tr_delta0: f64,
    pub tr_eta: f64,
    pub tr_gamma: f64,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            scheme: HessianScheme::Full,
            sample_size: 1,
            max_outer: 100,
            max_oracle_calls: 1e6,
            inner_cap: 100,
            inner_tol: 1e-8,
            line_search_rho: 1e-4,
            max_halvings: 30,
            tr_delta0: 1.0,
            tr_eta: 0.8,
            tr_gamma: 1.2,
            grad_tol: 1e-8,
            seed: 0,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SketchError::Config(m.to_string()));
        if !(self.line_search_rho > 0.0 && self.line_search_rho < 1.0) {
            return bad("line_search_rho must lie in (0, 1)");
        }
        if !(self.tr_eta > 0.0 && self.tr_eta < 1.0) {
            return bad("tr_eta must lie in (0, 1)");
        }
        if !(self.tr_gamma > 1.0) {
            return bad("tr_gamma must exceed 1");
        }
        if !(self.tr_delta0 > 0.0) {
            return bad("tr_delta0 must be positive");
        }
        if self.scheme != HessianScheme::Full && self.sample_size == 0 {
            return bad("sample_size must be at least 1 for sampled schemes");
        }
        if self.inner_cap == 0 {
            return bad("inner_cap must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptStatus {
    Converged,
    MaxIterations,
    BudgetExhausted,
    LineSearchFailed,
    RadiusUnderflow,
}

impl OptStatus {
    pub fn name(self) -> &'static str {
        match self {
            OptStatus::Converged => "converged",
            OptStatus::MaxIterations => "max_iterations",
            OptStatus::BudgetExhausted => "budget_exhausted",
            OptStatus::LineSearchFailed => "line_search_failed",
            OptStatus::RadiusUnderflow => "radius_underflow",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub oracle_calls: f64,
    pub objective: f64,
    pub grad_norm: f64,
    /// Line-search step for Newton-CG/MR, radius for trust region.
    pub step_or_radius: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct OptTrace {
    pub records: Vec<TraceRecord>,
    pub status: OptStatus,
    pub x: Vec<f64>,
    /// Iterations whose sampling scores were all zero (uniform substituted).
    pub uniform_fallbacks: usize,
    /// Trust-region iterations with a zero model decrease.
    pub degenerate_steps: usize,
}

impl OptTrace {
    /// Oracle calls at the first record with `‖∇F‖ ≤ tol`.
    pub fn calls_to_grad_tol(&self, tol: f64) -> Option<f64> {
        self.records.iter().find(|r| r.grad_norm <= tol).map(|r| r.oracle_calls)
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().map(|r| r.objective).unwrap_or(f64::NAN)
    }
}

/// Oracle units charged for one pass of fast approximate leverage scores of
/// `D^{1/2}A`: one product forming the embedded matrix and one with the
/// projected basis.
const LEVERAGE_CHARGE: f64 = 2.0;

/// Builds the per-iterate Hessian approximation and its sampling state.
pub(crate) struct HessianBuilder<'a> {
    problem: &'a FiniteSumProblem,
    scheme: HessianScheme,
    t: usize,
    seed: u64,
    lev_a: Option<Vec<f64>>,
    pub(crate) fallbacks: usize,
}

impl<'a> HessianBuilder<'a> {
    pub(crate) fn new(problem: &'a FiniteSumProblem, config: &OptConfig) -> Self {
        Self {
            problem,
            scheme: config.scheme,
            t: config.sample_size,
            seed: config.seed,
            lev_a: None,
            fallbacks: 0,
        }
    }

    pub(crate) fn build(&mut self, x: &[f64], iter: usize, meter: &mut OracleMeter) -> Result<HessianOperator> {
        let p = self.problem;
        let seed = derive_seed(self.seed, iter as u64);
        match self.scheme {
            HessianScheme::Full => Ok(HessianOperator::full(p, x)),
            HessianScheme::Sampled(SamplingScheme::Uniform) => {
                let n = p.n();
                let picks = draw(&vec![1.0; n], self.t, seed);
                let s = SamplingSketch { source_rows: n, picks };
                HessianOperator::sketched(p, x, SketchRef::Sampling(&s))
            }
            HessianScheme::Sampled(scheme) => {
                let d = p.d_diag(x, meter);
                let lev_a = match scheme {
                    SamplingScheme::LsMx => {
                        if self.lev_a.is_none() {
                            meter.charge(LEVERAGE_CHARGE);
                            self.lev_a = Some(leverage_scores_real(p.a())?);
                        }
                        self.lev_a.as_deref()
                    }
                    _ => None,
                };
                if matches!(scheme, SamplingScheme::Ls | SamplingScheme::LsMx) {
                    meter.charge(LEVERAGE_CHARGE);
                }
                let probs = scheme_probs_from_diag(p.a(), &d, scheme, lev_a)?;
                if probs.fallback {
                    self.fallbacks += 1;
                }
                let picks = draw(&probs.probs, self.t, seed);
                let s = SamplingSketch { source_rows: p.n(), picks };
                HessianOperator::sketched(p, x, SketchRef::Sampling(&s))
            }
            HessianScheme::LsDet { fraction } => {
                let d = p.d_diag(x, meter);
                meter.charge(LEVERAGE_CHARGE);
                let lev = weighted_leverage_scores(p.a(), &d)?;
                let plan = self.ls_det_plan(&d, &lev, fraction, seed, meter)?;
                HessianOperator::sketched(p, x, SketchRef::Hybrid(&plan))
            }
        }
    }

    fn ls_det_plan(
        &mut self,
        d: &[f64],
        lev: &[f64],
        fraction: f64,
        seed: u64,
        meter: &mut OracleMeter,
    ) -> Result<HybridPlan> {
        let n = lev.len();
        let keep = ((fraction * self.t as f64).round() as usize).min(self.t).min(n);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| lev[b].total_cmp(&lev[a]).then(a.cmp(&b)));
        let det: Vec<usize> = order[..keep].to_vec();
        let rest: Vec<usize> = order[keep..].to_vec();
        let h = self.t - keep;
        let mut picks = Vec::new();
        if h > 0 && !rest.is_empty() {
            let scores = if keep > 0 {
                // leverage of the remainder, recomputed on its own rows
                meter.charge(LEVERAGE_CHARGE);
                let sub = self.problem.a().select_rows(&rest);
                let dr: Vec<f64> = rest.iter().map(|&i| d[i]).collect();
                weighted_leverage_scores(&sub, &dr)?
            } else {
                lev.to_vec()
            };
            let probs = normalize_or_uniform(scores);
            if probs.fallback {
                self.fallbacks += 1;
            }
            picks = draw(&probs.probs, h, seed).into_iter().map(|(k, w)| (rest[k], w)).collect();
        }
        Ok(HybridPlan {
            deterministic_rows: det,
            sampled: SamplingSketch { source_rows: n, picks },
            rounds: 1,
            threshold: f64::NAN,
            remainder_mode: RemainderMode::Leverage,
            saturated: rest.is_empty(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_roundtrip() {
        for s in ["Full", "Uniform", "LS", "RN", "LS-MX", "RN-MX", "LS-Det(0.25)", "LS-Det(1)"] {
            let parsed = HessianScheme::parse(s).unwrap();
            assert_eq!(HessianScheme::parse(&parsed.to_string()), Some(parsed));
        }
        assert_eq!(HessianScheme::parse("LS-Det(2)"), None);
        assert_eq!(HessianScheme::parse("bogus"), None);
    }

    #[test]
    fn config_validation() {
        assert!(OptConfig::default().validate().is_ok());
        let c = OptConfig { tr_gamma: 1.0, ..OptConfig::default() };
        assert!(c.validate().is_err());
        let c = OptConfig { line_search_rho: 1.0, ..OptConfig::default() };
        assert!(c.validate().is_err());
    }
}
