use crate::error::Result;
use crate::optim::krylov::{cg_solve, cg_steihaug, dot, minnorm_lsq, norm};
use crate::optim::{HessianBuilder, OptConfig, OptStatus, OptTrace, TraceRecord};
use crate::problem::{FiniteSumProblem, OracleMeter};

fn step(x: &[f64], alpha: f64, p: &[f64]) -> Vec<f64> {
    x.iter().zip(p).map(|(a, b)| a + alpha * b).collect()
}

struct Run {
    records: Vec<TraceRecord>,
    meter: OracleMeter,
}

impl Run {
    fn record(&mut self, iter: usize, objective: f64, g: &[f64], step_or_radius: f64, accepted: bool) {
        self.records.push(TraceRecord {
            iter,
            oracle_calls: self.meter.units(),
            objective,
            grad_norm: norm(g),
            step_or_radius,
            accepted,
        });
    }

    fn finish(self, status: OptStatus, x: Vec<f64>, fallbacks: usize, degenerate: usize) -> OptTrace {
        OptTrace { records: self.records, status, x, uniform_fallbacks: fallbacks, degenerate_steps: degenerate }
    }
}

/// Newton-CG: CG on the sketched Hessian, then Armijo backtracking on `F`.
pub fn newton_cg(problem: &FiniteSumProblem, config: &OptConfig) -> Result<OptTrace> {
    config.validate()?;
    let mut run = Run { records: Vec::new(), meter: OracleMeter::new() };
    let mut builder = HessianBuilder::new(problem, config);
    let mut x = vec![0.0; problem.d()];
    let mut f = problem.value(&x, &mut run.meter);
    let mut g = problem.grad(&x, &mut run.meter);
    run.record(0, f, &g, 0.0, true);
    let mut status = OptStatus::MaxIterations;
    for k in 1..=config.max_outer {
        if norm(&g) <= config.grad_tol {
            status = OptStatus::Converged;
            break;
        }
        if run.meter.units() >= config.max_oracle_calls {
            status = OptStatus::BudgetExhausted;
            break;
        }
        let h = builder.build(&x, k, &mut run.meter)?;
        let meter = &mut run.meter;
        let p = cg_solve(&mut |v| h.apply(v, meter), &g, config.inner_cap, config.inner_tol);
        let slope = dot(&p, &g);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=config.max_halvings {
            let xn = step(&x, alpha, &p);
            let fn_ = problem.value(&xn, &mut run.meter);
            if fn_ <= f + config.line_search_rho * alpha * slope {
                accepted = Some((xn, fn_));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((xn, fn_)) => {
                x = xn;
                f = fn_;
                g = problem.grad(&x, &mut run.meter);
                run.record(k, f, &g, alpha, true);
            }
            None => {
                status = OptStatus::LineSearchFailed;
                run.record(k, f, &g, 0.0, false);
                break;
            }
        }
    }
    if status == OptStatus::MaxIterations && norm(&g) <= config.grad_tol {
        status = OptStatus::Converged;
    }
    Ok(run.finish(status, x, builder.fallbacks, 0))
}

/// Newton-MR: minimum-norm least-squares steps, backtracking on `‖∇F‖²`.
///
/// The objective in the trace is bookkeeping only and is not charged.
pub fn newton_mr(problem: &FiniteSumProblem, config: &OptConfig) -> Result<OptTrace> {
    config.validate()?;
    let mut run = Run { records: Vec::new(), meter: OracleMeter::new() };
    let mut builder = HessianBuilder::new(problem, config);
    let mut x = vec![0.0; problem.d()];
    let mut g = problem.grad(&x, &mut run.meter);
    run.record(0, problem.value_unmetered(&x), &g, 0.0, true);
    let mut status = OptStatus::MaxIterations;
    for k in 1..=config.max_outer {
        let gg = dot(&g, &g);
        if gg.sqrt() <= config.grad_tol {
            status = OptStatus::Converged;
            break;
        }
        if run.meter.units() >= config.max_oracle_calls {
            status = OptStatus::BudgetExhausted;
            break;
        }
        let h = builder.build(&x, k, &mut run.meter)?;
        let meter = &mut run.meter;
        let p = minnorm_lsq(&mut |v| h.apply(v, meter), &g, config.inner_cap, config.inner_tol);
        let hg = h.apply(&g, &mut run.meter);
        let slope = dot(&p, &hg);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=config.max_halvings {
            let xn = step(&x, alpha, &p);
            let gn = problem.grad(&xn, &mut run.meter);
            if dot(&gn, &gn) <= gg + 2.0 * config.line_search_rho * alpha * slope {
                accepted = Some((xn, gn));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((xn, gn)) => {
                x = xn;
                g = gn;
                run.record(k, problem.value_unmetered(&x), &g, alpha, true);
            }
            None => {
                status = OptStatus::LineSearchFailed;
                run.record(k, problem.value_unmetered(&x), &g, 0.0, false);
                break;
            }
        }
    }
    if status == OptStatus::MaxIterations && norm(&g) <= config.grad_tol {
        status = OptStatus::Converged;
    }
    Ok(run.finish(status, x, builder.fallbacks, 0))
}

/// Trust region with CG-Steihaug subproblems. The sketch is rebuilt only at
/// accepted iterates, so rejected steps are compared against the same model.
pub fn trust_region(problem: &FiniteSumProblem, config: &OptConfig) -> Result<OptTrace> {
    config.validate()?;
    let mut run = Run { records: Vec::new(), meter: OracleMeter::new() };
    let mut builder = HessianBuilder::new(problem, config);
    let mut x = vec![0.0; problem.d()];
    let mut f = problem.value(&x, &mut run.meter);
    let mut g = problem.grad(&x, &mut run.meter);
    let mut radius = config.tr_delta0;
    run.record(0, f, &g, radius, true);
    let mut h = None;
    let mut degenerate = 0;
    let mut status = OptStatus::MaxIterations;
    for k in 1..=config.max_outer {
        if norm(&g) <= config.grad_tol {
            status = OptStatus::Converged;
            break;
        }
        if run.meter.units() >= config.max_oracle_calls {
            status = OptStatus::BudgetExhausted;
            break;
        }
        if h.is_none() {
            h = Some(builder.build(&x, k, &mut run.meter)?);
        }
        let op = h.as_ref().expect("built above");
        let meter = &mut run.meter;
        let s = cg_steihaug(&mut |v| op.apply(v, meter), &g, radius, config.inner_cap, config.inner_tol);
        let xn = step(&x, 1.0, &s.p);
        let fn_ = problem.value(&xn, &mut run.meter);
        let rho = if s.model == 0.0 {
            degenerate += 1;
            1.0
        } else {
            (fn_ - f) / s.model
        };
        let accepted = rho >= config.tr_eta && fn_ <= f;
        if accepted {
            x = xn;
            f = fn_;
            g = problem.grad(&x, &mut run.meter);
            radius *= config.tr_gamma;
            h = None;
        } else {
            radius /= config.tr_gamma;
        }
        run.record(k, f, &g, radius, accepted);
        if radius < 1e-16 {
            status = OptStatus::RadiusUnderflow;
            break;
        }
    }
    if status == OptStatus::MaxIterations && norm(&g) <= config.grad_tol {
        status = OptStatus::Converged;
    }
    Ok(run.finish(status, x, builder.fallbacks, degenerate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RMat;
    use crate::optim::HessianScheme;
    use crate::problem::Loss;
    use crate::rng::{normal, rng_from_seed, uniform};
    use crate::sampling::SamplingScheme;

    fn quadratic(seed: u64) -> FiniteSumProblem {
        let mut rng = rng_from_seed(seed);
        let a = RMat::from_fn(200, 6, |_, _| normal(&mut rng));
        let b = (0..200).map(|_| normal(&mut rng)).collect();
        FiniteSumProblem::new(a, b, Loss::Quadratic, 0.1).unwrap()
    }

    fn cfg(scheme: HessianScheme, t: usize, tol: f64) -> OptConfig {
        OptConfig { scheme, sample_size: t, grad_tol: tol, ..OptConfig::default() }
    }

    #[test]
    fn full_newton_solves_quadratic_fast() {
        let p = quadratic(1);
        let c = cfg(HessianScheme::Full, 0, 1e-10);
        for trace in [newton_cg(&p, &c).unwrap(), newton_mr(&p, &c).unwrap()] {
            assert_eq!(trace.status, OptStatus::Converged);
            assert!(trace.records.len() <= 3, "{}", trace.records.len());
        }
        let tr = trust_region(&p, &OptConfig { grad_tol: 1e-8, ..c }).unwrap();
        assert_eq!(tr.status, OptStatus::Converged);
        assert!(tr.records.iter().all(|r| r.accepted));
    }

    #[test]
    fn cg_and_mr_agree_on_convex_quadratic() {
        let p = quadratic(2);
        let c = OptConfig { max_outer: 2, ..cfg(HessianScheme::Full, 0, 0.0) };
        let a = newton_cg(&p, &c).unwrap();
        let b = newton_mr(&p, &c).unwrap();
        for (u, v) in a.x.iter().zip(&b.x) {
            assert!((u - v).abs() < 1e-8);
        }
    }

    #[test]
    fn traces_are_monotone_and_deterministic() {
        let mut rng = rng_from_seed(3);
        let a = RMat::from_fn(400, 5, |_, _| normal(&mut rng));
        let b = (0..400).map(|_| (uniform(&mut rng) < 0.5) as u8 as f64).collect();
        let p = FiniteSumProblem::new(a, b, Loss::NllsClassification, 1e-3).unwrap();
        let c = OptConfig { max_outer: 30, seed: 9, ..cfg(HessianScheme::Sampled(SamplingScheme::Ls), 40, 1e-6) };
        let cg = newton_cg(&p, &c).unwrap();
        let mr = newton_mr(&p, &c).unwrap();
        let tr = trust_region(&p, &c).unwrap();
        for t in [&cg, &tr] {
            let acc: Vec<f64> = t.records.iter().filter(|r| r.accepted).map(|r| r.objective).collect();
            assert!(acc.windows(2).all(|w| w[1] <= w[0]));
        }
        let acc: Vec<f64> = mr.records.iter().filter(|r| r.accepted).map(|r| r.grad_norm).collect();
        assert!(acc.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        for t in [&cg, &mr, &tr] {
            assert!(t.records.windows(2).all(|w| w[1].oracle_calls > w[0].oracle_calls));
        }
        let again = trust_region(&p, &c).unwrap();
        assert_eq!(again.records, tr.records);
    }

    #[test]
    fn budget_is_honoured() {
        let p = quadratic(4);
        let c = OptConfig {
            max_oracle_calls: 7.0,
            ..cfg(HessianScheme::Sampled(SamplingScheme::Uniform), 10, 0.0)
        };
        for t in [newton_cg(&p, &c).unwrap(), newton_mr(&p, &c).unwrap(), trust_region(&p, &c).unwrap()] {
            assert_eq!(t.status, OptStatus::BudgetExhausted);
            let per_iter = t
                .records
                .windows(2)
                .map(|w| w[1].oracle_calls - w[0].oracle_calls)
                .fold(0.0, f64::max);
            assert!(t.records.last().unwrap().oracle_calls <= 7.0 + per_iter);
        }
    }

    #[test]
    fn zero_gradient_start_is_converged() {
        let a = RMat::from_fn(10, 2, |i, j| (i + j) as f64);
        let p = FiniteSumProblem::new(a, vec![0.0; 10], Loss::Quadratic, 0.0).unwrap();
        let t = trust_region(&p, &cfg(HessianScheme::Full, 0, 1e-12)).unwrap();
        assert_eq!(t.status, OptStatus::Converged);
        assert_eq!(t.records.len(), 1);
    }
}
