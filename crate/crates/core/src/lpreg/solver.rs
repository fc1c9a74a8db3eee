//! Dense ℓp regression for small instances.
//!
//! `min_y ‖(‖r_g‖₂)_g‖_p` with `r = My − c` split into consecutive groups of
//! one or two rows. Group size 1 is plain ℓp regression; group size 2 is the
//! mixed (p,2) objective of a lifted complex problem.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SketchError};
use crate::linalg::{check_p, lp_norm, RMat};

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub y: Vec<f64>,
    /// Objective at `y`, evaluated exactly (no smoothing).
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Smoothing floor, relative to the scale of the data.
const SMOOTHING_FLOOR: f64 = 1e-8;

/// Newton iterations allowed per smoothing level.
const NEWTON_ITERS: usize = 60;

pub fn small_lp_solve(m: &RMat, c: &[f64], p: f64, tol: f64) -> Result<LpSolution> {
    grouped_lp_solve(m, c, p, 1, tol)
}

pub fn grouped_lp_solve(m: &RMat, c: &[f64], p: f64, group: usize, tol: f64) -> Result<LpSolution> {
    check_p(p)?;
    if group != 1 && group != 2 {
        return Err(SketchError::invalid(format!("group size must be 1 or 2, got {group}")));
    }
    if m.nrows() != c.len() {
        return Err(SketchError::invalid(format!("{} rows but {} targets", m.nrows(), c.len())));
    }
    if m.nrows() % group != 0 {
        return Err(SketchError::invalid("row count is not a multiple of the group size"));
    }
    if m.ncols() == 0 {
        return Err(SketchError::invalid("regression needs at least one column"));
    }
    if m.iter().chain(c).any(|v| !v.is_finite()) {
        return Err(SketchError::invalid("regression data has non-finite entries"));
    }
    let inst = Instance { m, c: DVector::from_column_slice(c), p, group };
    let y0 = inst.least_squares();
    let obj0 = inst.objective(&y0);
    let scale = inst.c.amax().max(m.amax()).max(f64::MIN_POSITIVE);
    if p == 2.0 || obj0 <= 1e-14 * scale {
        return Ok(LpSolution { objective: obj0, y: y0.iter().copied().collect(), converged: true, iterations: 0 });
    }
    let sol = if p.is_infinite() {
        inst.smoothed_max(y0, tol)
    } else if p < 2.0 {
        inst.smoothed_below_two(y0, tol)
    } else {
        inst.irls_above_two(y0, tol)
    };
    Ok(sol)
}

struct Instance<'a> {
    m: &'a RMat,
    c: DVector<f64>,
    p: f64,
    group: usize,
}

impl Instance<'_> {
    fn residual(&self, y: &DVector<f64>) -> DVector<f64> {
        self.m * y - &self.c
    }

    fn group_norms(&self, r: &DVector<f64>) -> Vec<f64> {
        if self.group == 1 {
            r.iter().map(|v| v.abs()).collect()
        } else {
            r.as_slice().chunks_exact(2).map(|q| q[0].hypot(q[1])).collect()
        }
    }

    fn objective(&self, y: &DVector<f64>) -> f64 {
        lp_norm(&self.group_norms(&self.residual(y)), self.p)
    }

    fn least_squares(&self) -> DVector<f64> {
        let svd = self.m.clone().svd(true, true);
        let top = svd.singular_values.max();
        let eps = top * 1e-13 * (self.m.nrows().max(self.m.ncols()) as f64);
        svd.solve(&self.c, eps).expect("U and V were computed")
    }

    /// Weighted least squares `min Σ w_row (M y − c)_row²` through the normal
    /// equations; falls back to an SVD solve when Cholesky fails.
    fn weighted_ls(&self, row_w: &[f64]) -> DVector<f64> {
        let sw: Vec<f64> = row_w.iter().map(|w| w.sqrt()).collect();
        let mw = DMatrix::from_fn(self.m.nrows(), self.m.ncols(), |i, j| self.m[(i, j)] * sw[i]);
        let cw = DVector::from_iterator(sw.len(), self.c.iter().zip(&sw).map(|(a, b)| a * b));
        let mut normal = mw.tr_mul(&mw);
        let rhs = mw.tr_mul(&cw);
        let d = normal.nrows();
        let ridge = 1e-14 * normal.trace() / d as f64;
        for i in 0..d {
            normal[(i, i)] += ridge;
        }
        match normal.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => mw.svd(true, true).solve(&cw, 1e-13).expect("U and V were computed"),
        }
    }

    fn row_weights(&self, gw: &[f64]) -> Vec<f64> {
        gw.iter().flat_map(|&w| std::iter::repeat_n(w, self.group)).collect()
    }

    fn finish(&self, y: DVector<f64>, converged: bool, iterations: usize) -> LpSolution {
        LpSolution { objective: self.objective(&y), y: y.iter().copied().collect(), converged, iterations }
    }

    /// `1 ≤ p < 2`: Newton on `Σ_g (‖r_g‖² + ε²)^{p/2}` with backtracking,
    /// dividing `ε` by ten after each level down to the smoothing floor.
    fn smoothed_below_two(&self, mut y: DVector<f64>, tol: f64) -> LpSolution {
        let s0 = self.group_norms(&self.residual(&y));
        let top = s0.iter().copied().fold(0.0, f64::max);
        let floor = SMOOTHING_FLOOR * self.c.amax().max(top).max(f64::MIN_POSITIVE);
        let mut eps = (0.1 * top).max(floor);
        let mut iterations = 0;
        let mut converged;
        loop {
            let (its, done) = self.newton_power_level(&mut y, eps, tol);
            iterations += its;
            converged = done;
            if eps <= floor {
                break;
            }
            eps = (eps * 0.1).max(floor);
        }
        if self.p == 1.0 && self.group == 1 {
            if let Some(v) = self.polish_vertex(&y) {
                if self.objective(&v) <= self.objective(&y) {
                    y = v;
                }
            }
        }
        self.finish(y, converged, iterations)
    }

    /// Smoothed power objective, gradient and (optionally) Hessian.
    fn power_parts(&self, y: &DVector<f64>, eps: f64, want_hessian: bool) -> (f64, DVector<f64>, Option<DMatrix<f64>>) {
        let p = self.p;
        let k = self.group;
        let r = self.residual(y);
        let d = self.m.ncols();
        let ng = r.len() / k;
        let mut value = 0.0;
        // per-row gradient coefficient: ∂/∂r_row
        let mut gcoef = DVector::zeros(r.len());
        let mut curv_rows: Vec<(usize, [f64; 2], f64)> = Vec::new();
        for g in 0..ng {
            let rg = &r.as_slice()[g * k..(g + 1) * k];
            let rr: f64 = rg.iter().map(|v| v * v).sum();
            let u = rr + eps * eps;
            value += u.powf(p / 2.0);
            let a = p * u.powf(p / 2.0 - 1.0);
            for j in 0..k {
                gcoef[g * k + j] = a * rg[j];
            }
            if want_hessian {
                let along_w = p * u.powf(p / 2.0 - 2.0) * ((p - 1.0) * rr + eps * eps);
                let rn = rr.sqrt();
                let dir = if rn > 0.0 && k == 2 { [rg[0] / rn, rg[1] / rn] } else { [1.0, 0.0] };
                curv_rows.push((g, dir, along_w));
                if k == 2 {
                    curv_rows.push((g, [-dir[1], dir[0]], a));
                }
            }
        }
        let grad = self.m.tr_mul(&gcoef);
        if !want_hessian {
            return (value, grad, None);
        }
        let mut stacked = DMatrix::zeros(curv_rows.len(), d);
        for (i, (g, dir, w)) in curv_rows.iter().enumerate() {
            let sw = w.sqrt();
            for col in 0..d {
                let v: f64 = (0..k).map(|j| self.m[(g * k + j, col)] * dir[j]).sum();
                stacked[(i, col)] = v * sw;
            }
        }
        (value, grad, Some(stacked.tr_mul(&stacked)))
    }

    /// Newton iterations at one smoothing level. Returns the iteration count
    /// and whether the Newton decrement fell below tolerance.
    fn newton_power_level(&self, y: &mut DVector<f64>, eps: f64, tol: f64) -> (usize, bool) {
        let d = self.m.ncols();
        for it in 1..=NEWTON_ITERS {
            let (value, grad, h) = self.power_parts(y, eps, true);
            let mut h = h.expect("requested");
            let ridge = 1e-14 * (h.trace() / d as f64).max(f64::MIN_POSITIVE);
            for i in 0..d {
                h[(i, i)] += ridge;
            }
            let dir = match h.cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => -&grad,
            };
            let slope = grad.dot(&dir);
            if -slope <= 2.0 * tol.max(1e-15) * value {
                return (it, true);
            }
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let cand = &*y + &dir * alpha;
                let (v, _, _) = self.power_parts(&cand, eps, false);
                if v <= value + 1e-4 * alpha * slope {
                    *y = cand;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                return (it, false);
            }
        }
        (NEWTON_ITERS, false)
    }

    /// An ℓ1 minimizer interpolates `d` rows: solve exactly on the `d`
    /// smallest residuals.
    fn polish_vertex(&self, y: &DVector<f64>) -> Option<DVector<f64>> {
        let r = self.residual(y);
        let d = self.m.ncols();
        let mut order: Vec<usize> = (0..r.len()).collect();
        order.sort_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs()));
        let rows = &order[..d];
        let sys = self.m.select_rows(rows);
        let rhs = DVector::from_iterator(d, rows.iter().map(|&i| self.c[i]));
        sys.lu().solve(&rhs)
    }

    /// Damped IRLS for `p > 2`: step `1/(p−1)` toward the reweighted solution.
    fn irls_above_two(&self, mut y: DVector<f64>, tol: f64) -> LpSolution {
        let theta = 1.0 / (self.p - 1.0);
        let (mut best_y, mut best) = (y.clone(), self.objective(&y));
        let max_iter = 5000;
        for it in 1..=max_iter {
            let s = self.group_norms(&self.residual(&y));
            let top = s.iter().copied().fold(0.0, f64::max);
            let gw: Vec<f64> = s.iter().map(|v| (v / top).powf(self.p - 2.0)).collect();
            let target = self.weighted_ls(&self.row_weights(&gw));
            let delta = (&target - &y) * theta;
            y += &delta;
            let obj = self.objective(&y);
            if obj < best {
                best = obj;
                best_y = y.clone();
            }
            if delta.norm() <= tol * (1.0 + y.norm()) {
                return self.finish(best_y, true, it);
            }
        }
        self.finish(best_y, false, max_iter)
    }

    /// `p = ∞`: minimize `τ·log Σ_g exp(s_g/τ)` with smoothed group norms
    /// `s_g = sqrt(‖r_g‖² + τ²)` by damped Newton, halving `τ` until the
    /// exact objective stops changing, then polish on the active set.
    fn smoothed_max(&self, mut y: DVector<f64>, tol: f64) -> LpSolution {
        let obj0 = self.objective(&y);
        let mut tau = 0.1 * obj0;
        let tau_min = 1e-13 * obj0;
        let mut prev = obj0;
        let mut stable = 0;
        let mut iterations = 0;
        let mut converged = false;
        while tau > tau_min {
            iterations += self.newton_level(&mut y, tau);
            let obj = self.objective(&y);
            if (prev - obj).abs() <= tol * obj.max(f64::MIN_POSITIVE) {
                stable += 1;
                if stable >= 3 {
                    converged = true;
                    break;
                }
            } else {
                stable = 0;
            }
            prev = obj;
            tau *= 0.5;
        }
        if tau <= tau_min {
            converged = true;
        }
        if self.group == 1 {
            if let Some(polished) = self.polish_minimax(&y) {
                if self.objective(&polished) <= self.objective(&y) * (1.0 + 1e-12) {
                    y = polished;
                }
            }
        }
        self.finish(y, converged, iterations)
    }

    /// Smoothed objective, gradient, and Hessian at `y`.
    fn smoothed_parts(&self, y: &DVector<f64>, tau: f64, want_hessian: bool) -> (f64, DVector<f64>, Option<DMatrix<f64>>) {
        let r = self.residual(y);
        let k = self.group;
        let ng = r.len() / k;
        let d = self.m.ncols();
        let s: Vec<f64> = (0..ng)
            .map(|g| (0..k).map(|j| r[g * k + j].powi(2)).sum::<f64>().add_sq(tau))
            .collect();
        let smax = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = s.iter().map(|v| ((v - smax) / tau).exp()).collect();
        let z: f64 = e.iter().sum();
        let value = smax + tau * z.ln();
        let pi: Vec<f64> = e.iter().map(|v| v / z).collect();
        if k == 1 {
            return self.smoothed_parts_rows(&r, &s, &pi, value, tau, want_hessian);
        }
        // v_g = J_gᵀ u_g with u_g = r_g / s_g
        let active: Vec<usize> = (0..ng).filter(|&g| pi[g] > 1e-16).collect();
        let mut grad = DVector::zeros(d);
        let mut vrows = DMatrix::zeros(active.len(), d);
        for (a, &g) in active.iter().enumerate() {
            for j in 0..k {
                let row = g * k + j;
                let u = r[row] / s[g];
                for col in 0..d {
                    vrows[(a, col)] += self.m[(row, col)] * u;
                }
            }
            for col in 0..d {
                grad[col] += pi[g] * vrows[(a, col)];
            }
        }
        if !want_hessian {
            return (value, grad, None);
        }
        // curvature rows: outer-product term and the norm's own curvature
        let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(active.len() * (k + 1));
        for (a, &g) in active.iter().enumerate() {
            rows.push((vrows.row(a).iter().copied().collect(), pi[g] / tau));
            let rg: Vec<f64> = (0..k).map(|j| r[g * k + j]).collect();
            let rn = rg.iter().map(|v| v * v).sum::<f64>().sqrt();
            // I − uuᵀ: eigenvalue 1 − ‖u‖² along u, 1 across it
            let along: Vec<f64> = if rn > 0.0 { rg.iter().map(|v| v / rn).collect() } else {
                let mut e0 = vec![0.0; k];
                e0[0] = 1.0;
                e0
            };
            let lam_along = 1.0 - (rn / s[g]).powi(2);
            let mut dirs = vec![(along.clone(), lam_along)];
            if k == 2 {
                dirs.push((vec![-along[1], along[0]], 1.0));
            }
            for (dir, lam) in dirs {
                let w = pi[g] * lam / s[g];
                if w <= 0.0 {
                    continue;
                }
                let v: Vec<f64> = (0..d)
                    .map(|col| (0..k).map(|j| self.m[(g * k + j, col)] * dir[j]).sum())
                    .collect();
                rows.push((v, w));
            }
        }
        let mut stacked = DMatrix::zeros(rows.len(), d);
        for (i, (v, w)) in rows.iter().enumerate() {
            let sw = w.sqrt();
            for col in 0..d {
                stacked[(i, col)] = v[col] * sw;
            }
        }
        let mut h = stacked.tr_mul(&stacked);
        h -= &grad * grad.transpose() / tau;
        (value, grad, Some(h))
    }

    /// Group size 1: `∇ = Mᵀ(π∘u)` and `∇² = Mᵀ diag(π(u²/τ + (1−u²)/s)) M − ∇∇ᵀ/τ`.
    fn smoothed_parts_rows(
        &self,
        r: &DVector<f64>,
        s: &[f64],
        pi: &[f64],
        value: f64,
        tau: f64,
        want_hessian: bool,
    ) -> (f64, DVector<f64>, Option<DMatrix<f64>>) {
        let u: Vec<f64> = r.iter().zip(s).map(|(a, b)| a / b).collect();
        let coef = DVector::from_iterator(r.len(), u.iter().zip(pi).map(|(a, b)| a * b));
        let grad = self.m.tr_mul(&coef);
        if !want_hessian {
            return (value, grad, None);
        }
        let active: Vec<usize> = (0..r.len()).filter(|&i| pi[i] > 1e-16).collect();
        let mut rows = self.m.select_rows(&active);
        for (a, &i) in active.iter().enumerate() {
            let w = pi[i] * (u[i] * u[i] / tau + (1.0 - u[i] * u[i]) / s[i]);
            rows.row_mut(a).scale_mut(w.max(0.0).sqrt());
        }
        let mut h = rows.tr_mul(&rows);
        h -= &grad * grad.transpose() / tau;
        (value, grad, Some(h))
    }

    fn newton_level(&self, y: &mut DVector<f64>, tau: f64) -> usize {
        let d = self.m.ncols();
        for it in 1..=50 {
            let (value, grad, h) = self.smoothed_parts(y, tau, true);
            let mut h = h.expect("requested");
            let mu = 1e-12 * (h.trace().abs() / d as f64).max(f64::MIN_POSITIVE);
            for i in 0..d {
                h[(i, i)] += mu;
            }
            let dir = match h.clone().cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => -&grad,
            };
            let slope = grad.dot(&dir);
            if -slope <= 1e-14 * value.abs().max(tau) {
                return it;
            }
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let cand = &*y + &dir * alpha;
                let (v, _, _) = self.smoothed_parts(&cand, tau, false);
                if v <= value + 1e-4 * alpha * slope {
                    *y = cand;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved || -slope * 0.5 <= 1e-13 * value.abs() {
                return it;
            }
        }
        50
    }

    /// Solves the equioscillation system on the `d + 1` largest residuals.
    fn polish_minimax(&self, y: &DVector<f64>) -> Option<DVector<f64>> {
        let r = self.residual(y);
        let d = self.m.ncols();
        let mut order: Vec<usize> = (0..r.len()).collect();
        order.sort_by(|&a, &b| r[b].abs().total_cmp(&r[a].abs()));
        if order.len() < d + 1 {
            return None;
        }
        let act = &order[..d + 1];
        let top = r[act[0]].abs();
        if r[act[d]].abs() < top * (1.0 - 1e-4) {
            return None;
        }
        let sys = DMatrix::from_fn(d + 1, d + 1, |i, j| {
            let sgn = r[act[i]].signum();
            if j < d { sgn * self.m[(act[i], j)] } else { -1.0 }
        });
        let rhs = DVector::from_fn(d + 1, |i, _| r[act[i]].signum() * self.c[act[i]]);
        let sol = sys.lu().solve(&rhs)?;
        Some(sol.rows(0, d).into_owned())
    }
}

trait AddSq {
    fn add_sq(self, t: f64) -> f64;
}

impl AddSq for f64 {
    /// `sqrt(self + t²)` for a squared norm `self`.
    fn add_sq(self, t: f64) -> f64 {
        (self + t * t).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal, rng_from_seed, uniform};

    fn col(v: &[f64]) -> RMat {
        RMat::from_column_slice(v.len(), 1, v)
    }

    /// Weighted median of c_i/m_i with weights |m_i|.
    fn weighted_median(m: &[f64], c: &[f64]) -> f64 {
        let mut pts: Vec<(f64, f64)> = m.iter().zip(c).map(|(&a, &b)| (b / a, a.abs())).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let half = pts.iter().map(|p| p.1).sum::<f64>() / 2.0;
        let mut acc = 0.0;
        for (x, w) in pts {
            acc += w;
            if acc >= half {
                return x;
            }
        }
        unreachable!()
    }

    fn ternary(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..300 {
            let a = lo + (hi - lo) / 3.0;
            let b = hi - (hi - lo) / 3.0;
            if f(a) < f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn p2_matches_qr() {
        let mut rng = rng_from_seed(1);
        let m = RMat::from_fn(30, 4, |_, _| normal(&mut rng));
        let c: Vec<f64> = (0..30).map(|_| normal(&mut rng)).collect();
        let s = small_lp_solve(&m, &c, 2.0, 1e-12).unwrap();
        let qr = m.clone().qr();
        let qtc = qr.q().tr_mul(&DVector::from_vec(c.clone()));
        let y = qr.r().solve_upper_triangular(&qtc).unwrap();
        for (a, b) in s.y.iter().zip(y.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn p1_one_dimensional_matches_weighted_median() {
        let mut rng = rng_from_seed(2);
        for _ in 0..20 {
            let m: Vec<f64> = (0..25).map(|_| normal(&mut rng)).collect();
            let c: Vec<f64> = (0..25).map(|_| normal(&mut rng)).collect();
            let s = small_lp_solve(&col(&m), &c, 1.0, 1e-12).unwrap();
            let oracle = weighted_median(&m, &c);
            let f = |y: f64| m.iter().zip(&c).map(|(a, b)| (a * y - b).abs()).sum::<f64>();
            assert!((s.y[0] - oracle).abs() < 1e-6 || (f(s.y[0]) - f(oracle)).abs() < 1e-10, "{} {} {} {} {}", s.y[0], oracle, f(s.y[0]), f(oracle), s.iterations);
        }
    }

    #[test]
    fn pinf_one_dimensional_matches_ternary_search() {
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let m: Vec<f64> = (0..15).map(|_| normal(&mut rng)).collect();
            let c: Vec<f64> = (0..15).map(|_| normal(&mut rng)).collect();
            let f = |y: f64| m.iter().zip(&c).map(|(a, b)| (a * y - b).abs()).fold(0.0, f64::max);
            let s = small_lp_solve(&col(&m), &c, f64::INFINITY, 1e-12).unwrap();
            let oracle = ternary(f, -100.0, 100.0);
            assert!((s.y[0] - oracle).abs() < 1e-6, "{} vs {}", s.y[0], oracle);
        }
    }

    #[test]
    fn general_p_one_dimensional() {
        let mut rng = rng_from_seed(4);
        for p in [1.5, 3.0, 4.0] {
            let m: Vec<f64> = (0..12).map(|_| 0.5 + uniform(&mut rng)).collect();
            let c: Vec<f64> = (0..12).map(|_| normal(&mut rng)).collect();
            let f = |y: f64| m.iter().zip(&c).map(|(a, b)| (a * y - b).abs().powf(p)).sum::<f64>();
            let s = small_lp_solve(&col(&m), &c, p, 1e-12).unwrap();
            let oracle = ternary(f, -50.0, 50.0);
            assert!((s.y[0] - oracle).abs() < 1e-6, "p={p}: {} vs {}", s.y[0], oracle);
        }
    }

    #[test]
    fn zero_residual_recovered_for_all_p() {
        let mut rng = rng_from_seed(5);
        let m = RMat::from_fn(40, 5, |_, _| normal(&mut rng));
        let y0 = DVector::from_fn(5, |_, _| normal(&mut rng));
        let c: Vec<f64> = (&m * &y0).iter().copied().collect();
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let s = small_lp_solve(&m, &c, p, 1e-12).unwrap();
            for (a, b) in s.y.iter().zip(y0.iter()) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn p1_multivariate_is_not_worse_than_perturbations() {
        let mut rng = rng_from_seed(6);
        let m = RMat::from_fn(60, 4, |_, _| normal(&mut rng));
        let c: Vec<f64> = (0..60).map(|_| normal(&mut rng)).collect();
        for p in [1.0, f64::INFINITY] {
            let s = small_lp_solve(&m, &c, p, 1e-12).unwrap();
            let y = DVector::from_vec(s.y.clone());
            let obj = |y: &DVector<f64>| lp_norm(&(&m * y - DVector::from_vec(c.clone())).iter().map(|v| v.abs()).collect::<Vec<_>>(), p);
            assert!((obj(&y) - s.objective).abs() < 1e-12);
            for _ in 0..200 {
                let dy = DVector::from_fn(4, |_, _| 1e-3 * normal(&mut rng));
                assert!(obj(&(&y + dy)) >= s.objective - 1e-9);
            }
        }
    }

    #[test]
    fn grouped_matches_complex_regression_p2() {
        // group size is irrelevant at p = 2
        let mut rng = rng_from_seed(7);
        let m = RMat::from_fn(20, 3, |_, _| normal(&mut rng));
        let c: Vec<f64> = (0..20).map(|_| normal(&mut rng)).collect();
        let a = grouped_lp_solve(&m, &c, 2.0, 2, 1e-12).unwrap();
        let b = grouped_lp_solve(&m, &c, 2.0, 1, 1e-12).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-12);
        assert!(grouped_lp_solve(&m, &c[..19], 2.0, 1, 1e-12).is_err());
        assert!(grouped_lp_solve(&m, &c, 0.5, 1, 1e-12).is_err());
    }
}
