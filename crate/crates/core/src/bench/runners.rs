//! Experiment runners. Each returns the files it produced as `(name, contents)`
//! so callers can write them or compare them byte for byte.

use rayon::prelude::*;

use crate::bench::config::{ExperimentConfig, LambdaPolicy, Method, VmvInstance};
use crate::bench::data::{load_dataset, synth_planted, Dataset};
use crate::bench::output::{line_plot, Cell, Series, Table};
use crate::error::{Result, SketchError};
use crate::linalg::{c, CMat, CVec};
use crate::lpreg::{lift_instance, sketch_and_solve, SketchSolveParams};
use crate::optim::{newton_cg, newton_mr, trust_region, OptTrace};
use crate::problem::{convex_ridge_lambda, FiniteSumProblem};
use crate::rng::{derive_seed, normal, rng_from_seed};
use crate::sampling::{
    approx_leverage_scores, leverage_scores_real, scheme_probs_from_diag, ApproxParams, SamplingScheme,
};
use crate::vmv::{estimate_vmv, exact_vmv};

pub type Outputs = Vec<(String, String)>;

fn cell_seed(cfg: &ExperimentConfig, k: usize) -> u64 {
    derive_seed(cfg.seed, k as u64)
}

pub fn dataset_for(cfg: &ExperimentConfig) -> Result<Dataset> {
    if cfg.dataset == "synth" {
        let heavy = cfg.synth_heavy_rows.unwrap_or(cfg.synth_d);
        synth_planted(cfg.synth_n, cfg.synth_d, heavy, cfg.synth_heavy_scale, derive_seed(cfg.seed, 1 << 32))
    } else {
        load_dataset(std::path::Path::new(&cfg.dataset), &cfg.load_options())
    }
}

pub fn problem_for(cfg: &ExperimentConfig) -> Result<FiniteSumProblem> {
    let ds = dataset_for(cfg)?;
    let loss = cfg.loss_family().ok_or_else(|| SketchError::Config(format!("unknown loss {:?}", cfg.loss)))?;
    let p = FiniteSumProblem::new(ds.a, ds.labels, loss, cfg.lambda)?;
    Ok(match cfg.lambda_policy {
        LambdaPolicy::Manual => p,
        LambdaPolicy::ConvexAuto => {
            let lam = convex_ridge_lambda(&p, loss.curvature_bound());
            p.with_lambda(lam)
        }
    })
}

fn run_method(method: Method, p: &FiniteSumProblem, oc: &crate::optim::OptConfig) -> Result<OptTrace> {
    match method {
        Method::NewtonCg => newton_cg(p, oc),
        Method::NewtonMr => newton_mr(p, oc),
        Method::TrustRegion => trust_region(p, oc),
    }
}

fn file_tag(s: &str) -> String {
    let mapped: String = s.chars().map(|ch| if ch.is_ascii_alphanumeric() || ch == '.' { ch } else { '_' }).collect();
    mapped.split('_').filter(|p| !p.is_empty()).collect::<Vec<_>>().join("_")
}

/// One trace per (method × scheme × seed) plus a summary table.
pub fn run_optimize(cfg: &ExperimentConfig, svg: bool) -> Result<Outputs> {
    let problem = problem_for(cfg)?;
    let schemes = cfg.hessian_schemes();
    let mut cells = Vec::new();
    for &m in &cfg.methods {
        for &s in &schemes {
            for k in 0..cfg.seeds {
                cells.push((m, s, k));
            }
        }
    }
    let traces: Vec<Result<OptTrace>> = cells
        .par_iter()
        .map(|&(m, s, k)| run_method(m, &problem, &cfg.opt_config(s, problem.n(), cell_seed(cfg, k))))
        .collect();

    let mut out = Outputs::new();
    let mut summary = Table::new(&[
        "method",
        "scheme",
        "seed",
        "status",
        "iterations",
        "oracle_calls",
        "final_objective",
        "final_grad_norm",
        "calls_to_grad_tol",
        "uniform_fallbacks",
        "degenerate_steps",
    ]);
    let mut plots: Vec<(Method, Vec<Series>)> = cfg.methods.iter().map(|&m| (m, Vec::new())).collect();
    for (&(m, s, k), trace) in cells.iter().zip(traces) {
        let trace = trace?;
        let mut t = Table::new(&["iter", "oracle_calls", "objective", "grad_norm", "step_or_radius", "accepted"]);
        for r in &trace.records {
            t.push(vec![r.iter.into(), r.oracle_calls.into(), r.objective.into(), r.grad_norm.into(), r.step_or_radius.into(), r.accepted.into()]);
        }
        let scheme_name = s.to_string();
        out.push((format!("optimize_{}_{}_seed{k}.csv", m.name(), file_tag(&scheme_name)), t.render()));
        let last = trace.records.last().expect("at least the initial record");
        summary.push(vec![
            m.name().into(),
            scheme_name.as_str().into(),
            k.into(),
            trace.status.name().into(),
            last.iter.into(),
            last.oracle_calls.into(),
            last.objective.into(),
            last.grad_norm.into(),
            trace.calls_to_grad_tol(cfg.grad_tol).into(),
            trace.uniform_fallbacks.into(),
            trace.degenerate_steps.into(),
        ]);
        if k == 0 {
            let series = &mut plots.iter_mut().find(|(pm, _)| *pm == m).expect("method listed").1;
            series.push(Series {
                label: scheme_name,
                points: trace.records.iter().map(|r| (r.oracle_calls, r.objective)).collect(),
            });
        }
    }
    out.push(("optimize_summary.csv".into(), summary.render()));
    if svg {
        for (m, series) in plots {
            let title = format!("{} (seed 0)", m.name());
            out.push((format!("optimize_{}.svg", m.name()), line_plot(&title, "oracle calls", "F(x)", &series, true)));
        }
    }
    Ok(out)
}

fn complex_gaussian(n: usize, d: usize, seed: u64) -> (CMat, CVec) {
    let mut rng = rng_from_seed(seed);
    let a = CMat::from_fn(n, d, |_, _| c(normal(&mut rng), normal(&mut rng)));
    let b = CVec::new((0..n).map(|_| c(normal(&mut rng), normal(&mut rng))).collect());
    (a, b)
}

/// `‖x̂ − x*‖₂` and the relative objective excess for each sketch size and seed.
pub fn run_lpreg(cfg: &ExperimentConfig, svg: bool) -> Result<Outputs> {
    let cells: Vec<usize> = (0..cfg.seeds).collect();
    let rows: Vec<Result<Vec<(usize, usize, f64, f64)>>> = cells
        .par_iter()
        .map(|&k| {
            let seed = cell_seed(cfg, k);
            let (a, mut b) = complex_gaussian(cfg.lp_n, cfg.lp_d, seed);
            let mut rng = rng_from_seed(derive_seed(seed, 7));
            let planted = CVec::new((0..cfg.lp_d).map(|_| c(normal(&mut rng), normal(&mut rng))).collect());
            if cfg.zero_residual {
                b = a.matvec(&planted)?;
            }
            let lifted = lift_instance(&a, &b)?;
            let xstar = if cfg.zero_residual {
                planted
            } else {
                crate::linalg::unphi(&lifted.solve(cfg.p, cfg.solver_tol)?.y)?
            };
            let opt = lifted.objective(&xstar, cfg.p)?;
            let mut rows = Vec::new();
            for &size in &cfg.sizes {
                let params = SketchSolveParams { size, all_heavy: cfg.all_heavy, seed, tol: cfg.solver_tol };
                let r = sketch_and_solve(&a, &b, cfg.p, &params)?;
                let err_x = r.xhat.sub(&xstar).norm2();
                let obj = lifted.objective(&r.xhat, cfg.p)?;
                let err_obj = if opt > 0.0 { (obj - opt) / opt } else { obj };
                rows.push((size, k, err_x, err_obj));
            }
            Ok(rows)
        })
        .collect();
    let mut t = Table::new(&["t_or_s", "seed", "err_x", "err_obj"]);
    let mut all = Vec::new();
    for r in rows {
        all.extend(r?);
    }
    all.sort_by_key(|&(size, k, _, _)| (cfg.sizes.iter().position(|&s| s == size), k));
    for &(size, k, ex, eo) in &all {
        t.push(vec![size.into(), k.into(), ex.into(), eo.into()]);
    }
    let mut out = vec![("lpreg.csv".to_string(), t.render())];
    if svg {
        let pts: Vec<(f64, f64)> = cfg
            .sizes
            .iter()
            .map(|&s| (s as f64, median(all.iter().filter(|r| r.0 == s).map(|r| r.2).collect())))
            .collect();
        let label = if cfg.p.is_infinite() { "p = inf".to_string() } else { format!("p = {}", cfg.p) };
        let series = [Series { label, points: pts }];
        out.push(("lpreg.svg".into(), line_plot("median ||xhat - x*||", "t or s", "error", &series, false)));
    }
    Ok(out)
}

pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// Random or cancelling `(A, B, u, v)`; the cancellation instance repeats
/// one row pair with the second half of `B` negated.
pub fn vmv_instance(n: usize, d: usize, kind: VmvInstance, seed: u64) -> (CMat, CMat, CVec, CVec) {
    let mut rng = rng_from_seed(seed);
    let mut draw = |len: usize| CVec::new((0..len).map(|_| c(normal(&mut rng), normal(&mut rng))).collect());
    let u = draw(d);
    let v = draw(d);
    match kind {
        VmvInstance::Random => {
            let rows_a: Vec<CVec> = (0..n).map(|_| draw(d)).collect();
            let rows_b: Vec<CVec> = (0..n).map(|_| draw(d)).collect();
            let a = CMat::from_fn(n, d, |i, j| rows_a[i][j]);
            let b = CMat::from_fn(n, d, |i, j| rows_b[i][j]);
            (a, b, u, v)
        }
        VmvInstance::Cancellation => {
            let ra = draw(d).scale(c(100.0, 0.0));
            let rb = draw(d).scale(c(100.0, 0.0));
            let a = CMat::from_fn(n, d, |_, j| ra[j]);
            let b = CMat::from_fn(n, d, |i, j| if i < n / 2 { rb[j] } else { -rb[j] });
            (a, b, u, v)
        }
    }
}

/// Absolute error of the TensorSketch estimate per bucket count and seed.
pub fn run_vmv(cfg: &ExperimentConfig, svg: bool) -> Result<Outputs> {
    let mut cells = Vec::new();
    for &k in &cfg.ks {
        for s in 0..cfg.seeds {
            cells.push((k, s));
        }
    }
    let inst = vmv_instance(cfg.vmv_n, cfg.vmv_d, cfg.instance, derive_seed(cfg.seed, 1 << 32));
    let exact = exact_vmv(&inst.0, &inst.1, &inst.2, &inst.3)?;
    let errs: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(k, s)| {
            let est = estimate_vmv(&inst.0, &inst.1, &inst.2, &inst.3, k, cfg.reps, cell_seed(cfg, s))?;
            Ok((est - exact).norm())
        })
        .collect();
    let mut t = Table::new(&["k", "seed", "abs_err"]);
    let mut all = Vec::new();
    for (&(k, s), e) in cells.iter().zip(errs) {
        let e = e?;
        t.push(vec![k.into(), s.into(), e.into()]);
        all.push((k, e));
    }
    let mut out = vec![("vmv.csv".to_string(), t.render())];
    if svg {
        let pts = cfg.ks.iter().map(|&k| (k as f64, median(all.iter().filter(|r| r.0 == k).map(|r| r.1).collect()))).collect();
        let series = [Series { label: "median |error|".into(), points: pts }];
        out.push(("vmv.svg".into(), line_plot("TensorSketch error", "k", "abs error", &series, true)));
    }
    Ok(out)
}

/// Exact and approximate leverage scores of `A` and the per-scheme
/// probabilities at `x = 0`.
pub fn run_scores(cfg: &ExperimentConfig, _svg: bool) -> Result<Outputs> {
    let problem = problem_for(cfg)?;
    let a = problem.a();
    let exact = leverage_scores_real(a)?;
    let (n, d) = a.shape();
    let defaults = ApproxParams::defaults(n, d);
    let params = ApproxParams {
        embed_rows: cfg.embed_rows.unwrap_or(defaults.embed_rows),
        jl_cols: cfg.jl_cols.unwrap_or(defaults.jl_cols),
    };
    let approx = approx_leverage_scores(&CMat::from_real(a), params, cfg.seed)?;
    let x0 = vec![0.0; d];
    let diag = problem.d_diag_unmetered(&x0);
    let schemes = [SamplingScheme::Uniform, SamplingScheme::Ls, SamplingScheme::Rn, SamplingScheme::LsMx, SamplingScheme::RnMx];
    let probs: Vec<Vec<f64>> = schemes
        .iter()
        .map(|&s| scheme_probs_from_diag(a, &diag, s, Some(&exact)).map(|p| p.probs))
        .collect::<Result<_>>()?;
    let mut header = vec!["row".to_string(), "exact".into(), "approx".into(), "ratio".into()];
    header.extend(schemes.iter().map(|s| format!("p_{}", s.name())));
    let mut t = Table { header, rows: Vec::new() };
    for i in 0..n {
        let ratio = if exact[i] > 0.0 { Cell::Float(approx[i] / exact[i]) } else { Cell::Empty };
        let mut row = vec![i.into(), exact[i].into(), approx[i].into(), ratio];
        row.extend(probs.iter().map(|p| Cell::Float(p[i])));
        t.push(row);
    }
    Ok(vec![("scores.csv".into(), t.render())])
}
