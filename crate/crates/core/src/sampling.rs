//! Leverage scores, row-sampling sketches, and the sampling-score schemes.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{Result, SketchError};
use crate::linalg::{c, default_rank_tol, qr, svd, CMat, CScalar, RMat};
use crate::rng::{normal, rng_from_seed};

/// Nonnegative per-row scores (leverage scores or sampling probabilities).
pub type ScoreVector = Vec<f64>;

/// Exact leverage scores `‖U_i‖²` from the thin SVD of `b`, keeping only
/// singular directions above the default rank cutoff.
pub fn exact_leverage_scores(b: &CMat) -> Result<ScoreVector> {
    let dec = svd(b)?;
    let r = dec.rank(default_rank_tol(b.rows(), b.cols()));
    Ok((0..b.rows())
        .map(|i| (0..r).map(|j| dec.u[(i, j)].norm_sqr()).sum())
        .collect())
}

/// Exact leverage scores of a real matrix.
pub fn leverage_scores_real(m: &RMat) -> Result<ScoreVector> {
    let (n, d) = m.shape();
    if n == 0 || d == 0 {
        return Ok(vec![0.0; n]);
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(SketchError::invalid("leverage input has non-finite entries"));
    }
    let dec = m.clone().svd(true, false);
    let u = dec.u.expect("requested U");
    let top = dec.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = default_rank_tol(n, d) * top;
    let keep: Vec<usize> =
        (0..dec.singular_values.len()).filter(|&j| dec.singular_values[j] > cut).collect();
    Ok((0..n).map(|i| keep.iter().map(|&j| u[(i, j)] * u[(i, j)]).sum()).collect())
}

/// Leverage scores of `|D|^{1/2} A` for real `A` and a diagonal `d`.
pub fn weighted_leverage_scores(a: &RMat, d: &[f64]) -> Result<ScoreVector> {
    let scaled = RMat::from_fn(a.nrows(), a.ncols(), |i, j| d[i].abs().sqrt() * a[(i, j)]);
    leverage_scores_real(&scaled)
}

/// Sizes for [`approx_leverage_scores`].
#[derive(Clone, Copy, Debug)]
pub struct ApproxParams {
    /// Rows of the Gaussian subspace embedding.
    pub embed_rows: usize,
    /// Columns of the Johnson–Lindenstrauss projection.
    pub jl_cols: usize,
}

impl ApproxParams {
    pub fn defaults(n: usize, d: usize) -> Self {
        Self {
            embed_rows: 12 * d.max(1),
            jl_cols: ((8.0 * (n.max(2) as f64).ln()).ceil() as usize).max(16),
        }
    }
}

/// Approximate leverage scores `‖e_iᵀ B R⁻¹ G‖²`, where `SB = QR` for a dense
/// Gaussian embedding `S` and `G` is a scaled Gaussian JL matrix.
///
/// Only `s×d`, `d×d`, `d×r` and `n×r` intermediates are formed.
pub fn approx_leverage_scores(b: &CMat, params: ApproxParams, seed: u64) -> Result<ScoreVector> {
    let (n, d) = (b.rows(), b.cols());
    let (s, r) = (params.embed_rows, params.jl_cols);
    if s < d {
        return Err(SketchError::invalid(format!("embedding needs at least {d} rows, got {s}")));
    }
    if r == 0 {
        return Err(SketchError::invalid("JL projection needs at least one column"));
    }
    if !b.is_finite() {
        return Err(SketchError::invalid("leverage input has non-finite entries"));
    }
    let mut rng = rng_from_seed(seed);
    // SB accumulated row by row of B so S is never stored.
    let inv_sqrt_s = 1.0 / (s as f64).sqrt();
    let mut sb = CMat::zeros(s, d);
    for i in 0..n {
        let row = b.row(i);
        for k in 0..s {
            let g = normal(&mut rng) * inv_sqrt_s;
            for (o, &x) in sb.row_mut(k).iter_mut().zip(row) {
                *o += x * g;
            }
        }
    }
    let (_, rf) = qr(&sb)?;
    let top = (0..d).map(|i| rf[(i, i)].norm()).fold(0.0, f64::max);
    if (0..d).any(|i| rf[(i, i)].norm() <= default_rank_tol(s, d) * top) || top == 0.0 {
        return Err(SketchError::RankDeficient(
            "embedded matrix is rank deficient; use exact leverage scores".into(),
        ));
    }
    let inv_sqrt_r = 1.0 / (r as f64).sqrt();
    let g = CMat::from_fn(d, r, |_, _| c(normal(&mut rng) * inv_sqrt_r, 0.0));
    let rg = solve_upper(&rf, &g);
    let brg = b.matmul(&rg)?;
    Ok((0..n).map(|i| brg.row_norm_sqr(i)).collect())
}

/// Solves `R X = G` for upper-triangular `R` by back substitution.
fn solve_upper(r: &CMat, g: &CMat) -> CMat {
    let d = r.rows();
    let mut x = g.clone();
    for col in 0..g.cols() {
        for i in (0..d).rev() {
            let mut acc = x[(i, col)];
            for k in i + 1..d {
                acc -= r[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = acc / r[(i, i)];
        }
    }
    x
}

/// A weighted row-selection operator: row `j` of `S·B` is `weight_j · B[row_j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingSketch {
    pub source_rows: usize,
    pub picks: Vec<(usize, f64)>,
}

impl SamplingSketch {
    pub fn len(&self) -> usize {
        self.picks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.picks.is_empty()
    }
}

/// Draws `t` rows i.i.d. from `probs` (with replacement), each pick of row `i`
/// weighted `1/sqrt(t·p_i)`.
pub fn build_sampling_sketch(probs: &[f64], t: usize, seed: u64) -> Result<SamplingSketch> {
    if t == 0 {
        return Err(SketchError::invalid("sample count must be at least 1"));
    }
    if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(SketchError::invalid("probabilities must be finite and nonnegative"));
    }
    let total: f64 = probs.iter().sum();
    if total == 0.0 {
        return Err(SketchError::invalid("all sampling probabilities are zero"));
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(SketchError::invalid(format!("probabilities sum to {total}, expected 1")));
    }
    Ok(SamplingSketch { source_rows: probs.len(), picks: draw(probs, t, seed) })
}

/// `t` weighted picks from unnormalized nonnegative weights; weights use the
/// normalized probabilities.
pub(crate) fn draw(weights: &[f64], t: usize, seed: u64) -> Vec<(usize, f64)> {
    let total: f64 = weights.iter().sum();
    let dist = WeightedIndex::new(weights).expect("weights checked by caller");
    let mut rng = rng_from_seed(seed);
    (0..t)
        .map(|_| {
            let i = dist.sample(&mut rng);
            (i, 1.0 / (t as f64 * weights[i] / total).sqrt())
        })
        .collect()
}

pub fn apply_sketch(s: &SamplingSketch, b: &CMat) -> Result<CMat> {
    if s.source_rows != b.rows() {
        return Err(SketchError::invalid(format!(
            "sketch built for {} rows applied to a matrix with {}",
            s.source_rows,
            b.rows()
        )));
    }
    let mut out = CMat::zeros(s.picks.len(), b.cols());
    for (j, &(i, w)) in s.picks.iter().enumerate() {
        if i >= b.rows() {
            return Err(SketchError::invalid(format!("pick index {i} out of range")));
        }
        for (o, &x) in out.row_mut(j).iter_mut().zip(b.row(i)) {
            *o = x * w;
        }
    }
    Ok(out)
}

/// `Mᵀ M` with the real (non-conjugating) transpose.
pub fn gram_t(m: &CMat) -> CMat {
    m.transpose().matmul(m).expect("shapes agree")
}

/// `γ = ‖Σ (‖B_i‖²/ℓ̃_i) B_i* B_i‖`; zero rows contribute nothing.
pub fn gamma_factor(b: &CMat, scores: &[f64]) -> Result<f64> {
    if scores.len() != b.rows() {
        return Err(SketchError::invalid("score vector length differs from row count"));
    }
    let d = b.cols();
    let mut acc = CMat::zeros(d, d);
    for (i, &l) in scores.iter().enumerate() {
        let nrm = b.row_norm_sqr(i);
        if nrm == 0.0 {
            continue;
        }
        if !(l > 0.0) {
            return Err(SketchError::invalid(format!("row {i} is nonzero but has score {l}")));
        }
        let row = b.row(i);
        let f = nrm / l;
        for p in 0..d {
            let rp: CScalar = row[p].conj() * f;
            for q in 0..d {
                acc[(p, q)] += rp * row[q];
            }
        }
    }
    Ok(crate::linalg::spectral_norm(&acc))
}

/// Row-sampling score schemes for `D^{1/2}A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SamplingScheme {
    Uniform,
    /// Leverage scores of `D^{1/2}A`.
    Ls,
    /// Squared row norms of `D^{1/2}A`.
    Rn,
    /// `ℓ_i(A) + ℓ_i(DA)`.
    LsMx,
    /// `‖A_i‖ + ‖(DA)_i‖`.
    RnMx,
}

impl SamplingScheme {
    pub fn name(self) -> &'static str {
        match self {
            SamplingScheme::Uniform => "Uniform",
            SamplingScheme::Ls => "LS",
            SamplingScheme::Rn => "RN",
            SamplingScheme::LsMx => "LS-MX",
            SamplingScheme::RnMx => "RN-MX",
        }
    }
}

/// Normalized sampling probabilities; `fallback` is set when every raw score
/// was zero and uniform probabilities were substituted.
#[derive(Clone, Debug)]
pub struct SchemeProbs {
    pub probs: ScoreVector,
    pub fallback: bool,
}

/// Probabilities for `scheme` given the data matrix, the diagonal `d = D(x)`
/// and, for LS-MX, the (x-independent) leverage scores of `A`.
pub fn scheme_probs_from_diag(
    a: &RMat,
    d: &[f64],
    scheme: SamplingScheme,
    lev_a: Option<&[f64]>,
) -> Result<SchemeProbs> {
    let n = a.nrows();
    if d.len() != n {
        return Err(SketchError::invalid("diagonal length differs from row count"));
    }
    let row_sq: Vec<f64> = (0..n).map(|i| a.row(i).norm_squared()).collect();
    let raw: Vec<f64> = match scheme {
        SamplingScheme::Uniform => vec![1.0; n],
        SamplingScheme::Ls => weighted_leverage_scores(a, d)?,
        SamplingScheme::Rn => (0..n).map(|i| d[i].abs() * row_sq[i]).collect(),
        SamplingScheme::LsMx => {
            let own;
            let la = match lev_a {
                Some(l) => l,
                None => {
                    own = leverage_scores_real(a)?;
                    &own
                }
            };
            let sq: Vec<f64> = d.iter().map(|x| x * x).collect();
            let lda = weighted_leverage_scores(a, &sq)?;
            la.iter().zip(&lda).map(|(x, y)| x + y).collect()
        }
        SamplingScheme::RnMx => {
            (0..n).map(|i| row_sq[i].sqrt() * (1.0 + d[i].abs())).collect()
        }
    };
    Ok(normalize_or_uniform(raw))
}

pub(crate) fn normalize_or_uniform(raw: Vec<f64>) -> SchemeProbs {
    let n = raw.len();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        if n > 0 {
            log::warn!("all sampling scores are zero; falling back to uniform");
        }
        return SchemeProbs { probs: vec![1.0 / n as f64; n], fallback: true };
    }
    SchemeProbs { probs: raw.into_iter().map(|x| x / total).collect(), fallback: false }
}
