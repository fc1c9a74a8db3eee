//! Finite-sum objectives `F(x) = (1/n) Σ f_i(a_iᵀx) + (λ/2)‖x‖²`, their
//! derivative oracles, and oracle-call accounting.

use nalgebra::DVector;

use crate::error::{Result, SketchError};
use crate::hybrid::HybridPlan;
use crate::linalg::{spectral_norm_real, RMat};
use crate::sampling::SamplingSketch;

/// Per-row loss `f_i(t) = f(t, b_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Loss {
    /// `(σ(t) − b)²` with the logistic sigmoid `σ`.
    NllsClassification,
    /// `(t − b)² / (1 + (t − b)²)`.
    TukeyBiweight,
    /// `(t − b)² / 2`.
    Quadratic,
}

const SIGMOID_CLAMP: f64 = 36.0;

fn sigmoid(t: f64) -> f64 {
    let t = t.clamp(-SIGMOID_CLAMP, SIGMOID_CLAMP);
    1.0 / (1.0 + (-t).exp())
}

impl Loss {
    pub fn name(self) -> &'static str {
        match self {
            Loss::NllsClassification => "nlls",
            Loss::TukeyBiweight => "tukey",
            Loss::Quadratic => "quadratic",
        }
    }

    pub fn parse(s: &str) -> Option<Loss> {
        match s {
            "nlls" | "nlls_classification" => Some(Loss::NllsClassification),
            "tukey" | "tukey_biweight" => Some(Loss::TukeyBiweight),
            "quadratic" => Some(Loss::Quadratic),
            _ => None,
        }
    }

    pub fn f(self, t: f64, b: f64) -> f64 {
        match self {
            Loss::NllsClassification => (sigmoid(t) - b).powi(2),
            Loss::TukeyBiweight => {
                let r2 = (t - b).powi(2);
                r2 / (1.0 + r2)
            }
            Loss::Quadratic => 0.5 * (t - b).powi(2),
        }
    }

    pub fn df(self, t: f64, b: f64) -> f64 {
        match self {
            Loss::NllsClassification => {
                let s = sigmoid(t);
                2.0 * (s - b) * s * (1.0 - s)
            }
            Loss::TukeyBiweight => {
                let r = t - b;
                2.0 * r / (1.0 + r * r).powi(2)
            }
            Loss::Quadratic => t - b,
        }
    }

    pub fn d2f(self, t: f64, b: f64) -> f64 {
        match self {
            Loss::NllsClassification => {
                let s = sigmoid(t);
                let s1 = s * (1.0 - s);
                let s2 = s1 * (1.0 - 2.0 * s);
                2.0 * (s1 * s1 + (s - b) * s2)
            }
            Loss::TukeyBiweight => {
                let r2 = (t - b).powi(2);
                (2.0 - 6.0 * r2) / (1.0 + r2).powi(3)
            }
            Loss::Quadratic => 1.0,
        }
    }

    /// `sup_t |f''(t, b)|` over labels `b ∈ {0, 1}`.
    pub fn curvature_bound(self) -> f64 {
        match self {
            Loss::Quadratic => 1.0,
            Loss::TukeyBiweight => 2.0,
            Loss::NllsClassification => {
                // f''(t, 1) = f''(−t, 0), so one label suffices.
                let g = |t: f64| self.d2f(t, 0.0).abs();
                let (lo, hi, steps) = (-SIGMOID_CLAMP, SIGMOID_CLAMP, 72_000);
                let h = (hi - lo) / steps as f64;
                let (mut best_t, mut best) = (lo, g(lo));
                for k in 1..=steps {
                    let t = lo + k as f64 * h;
                    if g(t) > best {
                        best = g(t);
                        best_t = t;
                    }
                }
                // golden-section refinement inside the winning cell pair
                let (mut a, mut b) = (best_t - h, best_t + h);
                let phi = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..100 {
                    let x1 = b - phi * (b - a);
                    let x2 = a + phi * (b - a);
                    if g(x1) < g(x2) {
                        a = x1;
                    } else {
                        b = x2;
                    }
                }
                best.max(g(0.5 * (a + b)))
            }
        }
    }
}

/// Running oracle cost in function-evaluation units.
///
/// Gradient and function value cost 1 unit, a full Hessian-vector product 2
/// units, a sketched one `2·(rows used)/n` units, and one pass with `D^{1/2}A`
/// 1 unit. Units are kept fractional so small sketches are not rounded away.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OracleMeter {
    units: f64,
}

impl OracleMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn units(&self) -> f64 {
        self.units
    }

    pub fn charge(&mut self, units: f64) {
        debug_assert!(units >= 0.0);
        self.units += units;
    }
}

#[derive(Clone, Debug)]
pub struct FiniteSumProblem {
    a: RMat,
    labels: Vec<f64>,
    loss: Loss,
    lambda: f64,
}

impl FiniteSumProblem {
    pub fn new(a: RMat, labels: Vec<f64>, loss: Loss, lambda: f64) -> Result<Self> {
        if a.nrows() != labels.len() {
            return Err(SketchError::invalid(format!(
                "{} rows but {} labels",
                a.nrows(),
                labels.len()
            )));
        }
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(SketchError::invalid("problem needs at least one row and column"));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(SketchError::invalid(format!("ridge parameter must be >= 0, got {lambda}")));
        }
        if a.iter().chain(&labels).any(|v| !v.is_finite()) {
            return Err(SketchError::invalid("problem data has non-finite entries"));
        }
        Ok(Self { a, labels, loss, lambda })
    }

    pub fn a(&self) -> &RMat {
        &self.a
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn d(&self) -> usize {
        self.a.ncols()
    }

    fn margins(&self, x: &[f64]) -> DVector<f64> {
        &self.a * DVector::from_column_slice(x)
    }

    /// `F(x)` without charging a meter.
    pub fn value_unmetered(&self, x: &[f64]) -> f64 {
        let m = self.margins(x);
        let sum: f64 = m.iter().zip(&self.labels).map(|(&t, &b)| self.loss.f(t, b)).sum();
        sum / self.n() as f64 + 0.5 * self.lambda * x.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn value(&self, x: &[f64], meter: &mut OracleMeter) -> f64 {
        meter.charge(1.0);
        self.value_unmetered(x)
    }

    pub fn grad_unmetered(&self, x: &[f64]) -> Vec<f64> {
        let m = self.margins(x);
        let n = self.n() as f64;
        let r = DVector::from_iterator(
            m.len(),
            m.iter().zip(&self.labels).map(|(&t, &b)| self.loss.df(t, b) / n),
        );
        let g = self.a.tr_mul(&r);
        g.iter().zip(x).map(|(gi, xi)| gi + self.lambda * xi).collect()
    }

    pub fn grad(&self, x: &[f64], meter: &mut OracleMeter) -> Vec<f64> {
        meter.charge(1.0);
        self.grad_unmetered(x)
    }

    pub fn d_diag_unmetered(&self, x: &[f64]) -> Vec<f64> {
        let m = self.margins(x);
        m.iter().zip(&self.labels).map(|(&t, &b)| self.loss.d2f(t, b)).collect()
    }

    /// `D(x) = diag(f_i''(a_iᵀx))`; charged as one pass over the data.
    pub fn d_diag(&self, x: &[f64], meter: &mut OracleMeter) -> Vec<f64> {
        meter.charge(1.0);
        self.d_diag_unmetered(x)
    }

    /// `AᵀD(Av)/n + λv` without forming `AᵀDA`.
    pub fn hessp_full(&self, x: &[f64], v: &[f64], meter: &mut OracleMeter) -> Vec<f64> {
        HessianOperator::full(self, x).apply(v, meter)
    }

    /// Sketched Hessian-vector product for a sampling sketch or hybrid plan.
    pub fn hessp_sketched(
        &self,
        x: &[f64],
        v: &[f64],
        sketch: SketchRef<'_>,
        meter: &mut OracleMeter,
    ) -> Result<Vec<f64>> {
        Ok(HessianOperator::sketched(self, x, sketch)?.apply(v, meter))
    }

    /// Dense `∇²F(x)`, for tests and small diagnostics.
    pub fn hessian_dense(&self, x: &[f64]) -> RMat {
        HessianOperator::full(self, x).to_dense()
    }
}

/// A sketch the Hessian oracle can consume.
#[derive(Clone, Copy, Debug)]
pub enum SketchRef<'a> {
    Sampling(&'a SamplingSketch),
    Hybrid(&'a HybridPlan),
}

/// A Hessian approximation frozen at a point: `A_Sᵀ diag(c) A_S + λI`.
#[derive(Clone, Debug)]
pub struct HessianOperator {
    rows: RMat,
    coef: DVector<f64>,
    lambda: f64,
    charge: f64,
}

impl HessianOperator {
    pub fn full(problem: &FiniteSumProblem, x: &[f64]) -> Self {
        let n = problem.n() as f64;
        let d = problem.d_diag_unmetered(x);
        Self {
            rows: problem.a.clone(),
            coef: DVector::from_iterator(d.len(), d.iter().map(|v| v / n)),
            lambda: problem.lambda,
            charge: 2.0,
        }
    }

    /// Weighted rows `(index, weight)`; row `i` contributes
    /// `weight²·f_i''·a_i a_iᵀ / n`.
    pub fn from_weighted_rows(problem: &FiniteSumProblem, x: &[f64], picks: &[(usize, f64)]) -> Result<Self> {
        let n = problem.n();
        // merge repeated picks of the same row
        let mut acc: Vec<(usize, f64)> = Vec::with_capacity(picks.len());
        let mut slot: std::collections::HashMap<usize, usize> = std::collections::HashMap::with_capacity(picks.len());
        for &(i, w) in picks {
            if i >= n {
                return Err(SketchError::invalid(format!("sketch row {i} out of range")));
            }
            match slot.get(&i) {
                Some(&k) => acc[k].1 += w * w,
                None => {
                    slot.insert(i, acc.len());
                    acc.push((i, w * w));
                }
            }
        }
        let idx: Vec<usize> = acc.iter().map(|p| p.0).collect();
        let rows = problem.a.select_rows(&idx);
        let xv = DVector::from_column_slice(x);
        let m = &rows * xv;
        let coef = DVector::from_iterator(
            acc.len(),
            acc.iter()
                .zip(m.iter())
                .map(|(&(i, w2), &t)| w2 * problem.loss.d2f(t, problem.labels[i]) / n as f64),
        );
        Ok(Self {
            rows,
            coef,
            lambda: problem.lambda,
            charge: 2.0 * picks.len() as f64 / n as f64,
        })
    }

    pub fn sketched(problem: &FiniteSumProblem, x: &[f64], sketch: SketchRef<'_>) -> Result<Self> {
        match sketch {
            SketchRef::Sampling(s) => {
                check_source(s.source_rows, problem.n())?;
                Self::from_weighted_rows(problem, x, &s.picks)
            }
            SketchRef::Hybrid(plan) => {
                check_source(plan.sampled.source_rows, problem.n())?;
                let mut picks: Vec<(usize, f64)> =
                    plan.deterministic_rows.iter().map(|&i| (i, 1.0)).collect();
                picks.extend_from_slice(&plan.sampled.picks);
                Self::from_weighted_rows(problem, x, &picks)
            }
        }
    }

    /// Oracle units charged per product.
    pub fn charge_per_product(&self) -> f64 {
        self.charge
    }

    pub fn apply(&self, v: &[f64], meter: &mut OracleMeter) -> Vec<f64> {
        meter.charge(self.charge);
        self.apply_unmetered(v)
    }

    pub fn apply_unmetered(&self, v: &[f64]) -> Vec<f64> {
        let vv = DVector::from_column_slice(v);
        let t = (&self.rows * &vv).component_mul(&self.coef);
        let out = self.rows.tr_mul(&t) + vv * self.lambda;
        out.iter().copied().collect()
    }

    pub fn to_dense(&self) -> RMat {
        let scaled = RMat::from_fn(self.rows.nrows(), self.rows.ncols(), |i, j| {
            self.rows[(i, j)] * self.coef[i]
        });
        let d = self.rows.ncols();
        self.rows.tr_mul(&scaled) + RMat::identity(d, d) * self.lambda
    }
}

fn check_source(source: usize, n: usize) -> Result<()> {
    if source != n {
        return Err(SketchError::invalid(format!(
            "sketch built for {source} rows but problem has {n}"
        )));
    }
    Ok(())
}

/// `4·‖A‖²·h`, the ridge that makes the objective convex when `h ≥ sup|f''|`.
pub fn convex_ridge_lambda(problem: &FiniteSumProblem, h: f64) -> f64 {
    4.0 * spectral_norm_real(problem.a()).powi(2) * h
}
