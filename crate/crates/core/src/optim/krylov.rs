//! Inner solvers for the Newton-type subproblems. All of them touch the
//! Hessian only through products `v ↦ Hv`.

use nalgebra::{DMatrix, DVector};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Conjugate gradients on `H p = −g`.
///
/// Stops at `cap` iterations or when `‖r‖ ≤ tol·‖g‖`. On nonpositive
/// curvature it returns the current iterate, or `−g` if that happens before
/// the first update.
pub fn cg_solve(hessp: &mut dyn FnMut(&[f64]) -> Vec<f64>, g: &[f64], cap: usize, tol: f64) -> Vec<f64> {
    let gn = norm(g);
    let mut p = vec![0.0; g.len()];
    if gn == 0.0 {
        return p;
    }
    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut d = r.clone();
    let mut rr = dot(&r, &r);
    for it in 0..cap {
        let hd = hessp(&d);
        let curv = dot(&d, &hd);
        if !(curv > 0.0) {
            if it == 0 {
                return r;
            }
            return p;
        }
        let alpha = rr / curv;
        axpy(&mut p, alpha, &d);
        axpy(&mut r, -alpha, &hd);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * gn {
            break;
        }
        let beta = rr_new / rr;
        for (di, ri) in d.iter_mut().zip(&r) {
            *di = ri + beta * *di;
        }
        rr = rr_new;
    }
    p
}

/// Minimum-norm minimizer of `‖H p + g‖` for symmetric (possibly singular,
/// indefinite) `H`.
///
/// Runs Lanczos with full reorthogonalization from `Hg`, so every iterate lies
/// in the range of `H`; the least-squares problem projected onto the Krylov
/// basis is solved densely at each step. When the basis becomes invariant the
/// iterate equals `−H†g`.
pub fn minnorm_lsq(hessp: &mut dyn FnMut(&[f64]) -> Vec<f64>, g: &[f64], cap: usize, tol: f64) -> Vec<f64> {
    let n = g.len();
    let gn = norm(g);
    if gn == 0.0 {
        return vec![0.0; n];
    }
    let hg = hessp(g);
    let beta0 = norm(&hg);
    if beta0 <= f64::EPSILON * gn {
        return vec![0.0; n];
    }
    let mut q: Vec<Vec<f64>> = vec![hg.iter().map(|v| v / beta0).collect()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut scale = beta0 / gn;
    let mut p = vec![0.0; n];
    let mut prev_res = f64::INFINITY;
    let steps = cap.min(n).max(1);
    for k in 0..steps {
        let mut w = hessp(&q[k]);
        let a = dot(&w, &q[k]);
        alphas.push(a);
        // full reorthogonalization (twice is enough)
        for _ in 0..2 {
            for qj in &q {
                let c = dot(&w, qj);
                axpy(&mut w, -c, qj);
            }
        }
        let b = norm(&w);
        scale = scale.max(a.abs()).max(b);
        let invariant = b <= 1e-12 * scale;
        betas.push(if invariant { 0.0 } else { b });
        if !invariant {
            q.push(w.iter().map(|v| v / b).collect());
        }
        // projected problem: min ‖T̄ y + Qᵀg‖ with T̄ of size (m × k+1)
        let kk = k + 1;
        let m = q.len();
        let tbar = DMatrix::from_fn(m, kk, |i, j| {
            if i == j {
                alphas[j]
            } else if i == j + 1 {
                betas[j]
            } else if j == i + 1 {
                betas[i]
            } else {
                0.0
            }
        });
        let c = DVector::from_iterator(m, q.iter().map(|qi| -dot(qi, g)));
        let y = tbar
            .clone()
            .svd(true, true)
            .solve(&c, 1e-14 * scale)
            .expect("svd solve with U and V");
        let mut p_new = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            axpy(&mut p_new, *yj, &q[j]);
        }
        // ‖Hp + g‖² = ‖T̄y − c‖² + ‖g‖² − ‖c‖²
        let fit = (&tbar * &y - &c).norm_squared();
        let res = (fit + gn * gn - c.norm_squared()).max(0.0).sqrt();
        let delta = p_new.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let pn = norm(&p_new);
        p = p_new;
        if invariant || res <= tol * gn {
            break;
        }
        if k > 0 && delta <= tol * pn && (prev_res - res).abs() <= tol * gn {
            break;
        }
        prev_res = res;
    }
    p
}

/// Result of [`cg_steihaug`]: the step and its model value `gᵀp + ½pᵀHp`.
#[derive(Clone, Debug)]
pub struct SteihaugStep {
    pub p: Vec<f64>,
    pub model: f64,
    pub on_boundary: bool,
}

/// Solves `τ ≥ 0` with `‖z + τd‖ = radius`.
fn to_boundary(z: &[f64], d: &[f64], radius: f64) -> f64 {
    let a = dot(d, d);
    let b = 2.0 * dot(z, d);
    let c = dot(z, z) - radius * radius;
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    // stable root of the larger sign
    if b >= 0.0 {
        (-2.0 * c) / (b + disc)
    } else {
        (-b + disc) / (2.0 * a)
    }
}

/// CG-Steihaug for `min gᵀp + ½pᵀHp` subject to `‖p‖ ≤ radius`.
pub fn cg_steihaug(
    hessp: &mut dyn FnMut(&[f64]) -> Vec<f64>,
    g: &[f64],
    radius: f64,
    cap: usize,
    tol: f64,
) -> SteihaugStep {
    let n = g.len();
    let gn = norm(g);
    let mut z = vec![0.0; n];
    if gn == 0.0 {
        return SteihaugStep { p: z, model: 0.0, on_boundary: false };
    }
    let mut r = g.to_vec();
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut rr = dot(&r, &r);
    // m(z) = ½ zᵀ(g + r) with r = g + Hz
    let model = |z: &[f64], r: &[f64]| 0.5 * z.iter().zip(g.iter().zip(r)).map(|(zi, (gi, ri))| zi * (gi + ri)).sum::<f64>();
    for _ in 0..cap {
        let hd = hessp(&d);
        let curv = dot(&d, &hd);
        if curv <= 0.0 {
            let tau = to_boundary(&z, &d, radius);
            axpy(&mut z, tau, &d);
            axpy(&mut r, tau, &hd);
            return SteihaugStep { model: model(&z, &r), p: z, on_boundary: true };
        }
        let alpha = rr / curv;
        let mut z_next = z.clone();
        axpy(&mut z_next, alpha, &d);
        if norm(&z_next) >= radius {
            let tau = to_boundary(&z, &d, radius);
            axpy(&mut z, tau, &d);
            axpy(&mut r, tau, &hd);
            return SteihaugStep { model: model(&z, &r), p: z, on_boundary: true };
        }
        z = z_next;
        axpy(&mut r, alpha, &hd);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * gn {
            break;
        }
        let beta = rr_new / rr;
        for (di, ri) in d.iter_mut().zip(&r) {
            *di = -ri + beta * *di;
        }
        rr = rr_new;
    }
    SteihaugStep { model: model(&z, &r), p: z, on_boundary: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal, rng_from_seed};

    fn dense_op(h: DMatrix<f64>) -> impl FnMut(&[f64]) -> Vec<f64> {
        move |v: &[f64]| (&h * DVector::from_column_slice(v)).iter().copied().collect()
    }

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn cg_identity_one_step() {
        let mut calls = 0;
        let mut op = |v: &[f64]| {
            calls += 1;
            v.to_vec()
        };
        let p = cg_solve(&mut op, &[1.0, -2.0, 3.0], 100, 1e-8);
        assert_eq!(p, vec![-1.0, 2.0, -3.0]);
        assert_eq!(calls, 1);
    }

    #[test]
    fn cg_diagonal() {
        let p = cg_solve(&mut dense_op(diag(&[1.0, 10.0])), &[1.0, 1.0], 100, 1e-12);
        assert!((p[0] + 1.0).abs() < 1e-10 && (p[1] + 0.1).abs() < 1e-10);
    }

    #[test]
    fn cg_negative_curvature_falls_back() {
        let p = cg_solve(&mut dense_op(diag(&[-1.0, 2.0])), &[1.0, 0.0], 100, 1e-8);
        assert_eq!(p, vec![-1.0, 0.0]);
    }

    #[test]
    fn minnorm_cases() {
        let p = minnorm_lsq(&mut dense_op(diag(&[2.0, 4.0])), &[1.0, 1.0], 100, 1e-12);
        assert!((p[0] + 0.5).abs() < 1e-12 && (p[1] + 0.25).abs() < 1e-12);
        let p = minnorm_lsq(&mut dense_op(diag(&[1.0, 0.0])), &[1.0, 1.0], 100, 1e-12);
        assert!((p[0] + 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn minnorm_matches_pseudoinverse() {
        let mut rng = rng_from_seed(12);
        for _ in 0..20 {
            // rank-4 symmetric indefinite in dimension 6
            let u = DMatrix::from_fn(6, 4, |_, _| normal(&mut rng)).qr().q();
            let lam = DVector::from_vec(vec![3.0, -2.0, 0.5, -0.1]);
            let h = &u * DMatrix::from_diagonal(&lam) * u.transpose();
            let g: Vec<f64> = (0..6).map(|_| normal(&mut rng)).collect();
            let p = minnorm_lsq(&mut dense_op(h.clone()), &g, 100, 1e-12);
            let oracle = -(h.clone().pseudo_inverse(1e-10).unwrap() * DVector::from_vec(g.clone()));
            for (a, b) in p.iter().zip(oracle.iter()) {
                assert!((a - b).abs() < 1e-6, "{a} vs {b}");
            }
        }
    }

    /// Global minimum of the 2-D trust-region subproblem: the interior Newton
    /// point when `H` is positive definite and it fits, otherwise the best
    /// boundary point found by an angle scan plus golden-section refinement.
    fn exact_tr_2d(h: &DMatrix<f64>, g: &[f64], radius: f64) -> f64 {
        let gv = DVector::from_column_slice(g);
        let m = |p: &DVector<f64>| gv.dot(p) + 0.5 * p.dot(&(h * p));
        let eig = h.clone().symmetric_eigen();
        if eig.eigenvalues.min() > 0.0 {
            let p = -(h.clone().try_inverse().unwrap() * &gv);
            if p.norm() <= radius {
                return m(&p);
            }
        }
        let at = |th: f64| m(&DVector::from_vec(vec![radius * th.cos(), radius * th.sin()]));
        let steps = 20_000;
        let w = std::f64::consts::TAU / steps as f64;
        let best = (0..steps).min_by(|&i, &j| at(i as f64 * w).total_cmp(&at(j as f64 * w))).unwrap();
        let (mut a, mut b) = ((best as f64 - 1.0) * w, (best as f64 + 1.0) * w);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let x1 = b - r * (b - a);
            let x2 = a + r * (b - a);
            if at(x1) > at(x2) {
                a = x1;
            } else {
                b = x2;
            }
        }
        at(0.5 * (a + b))
    }

    #[test]
    fn steihaug_trivial_cases() {
        let s = cg_steihaug(&mut dense_op(diag(&[1.0, 1.0])), &[0.0, 0.0], 1.0, 100, 1e-10);
        assert_eq!(s.p, vec![0.0, 0.0]);
        let s = cg_steihaug(&mut dense_op(diag(&[1.0, 1.0])), &[0.3, -0.4], 1.0, 100, 1e-10);
        assert!((s.p[0] + 0.3).abs() < 1e-12 && (s.p[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn steihaug_negative_curvature_matches_exact() {
        let h = diag(&[-1.0, 1.0]);
        let s = cg_steihaug(&mut dense_op(h.clone()), &[1.0, 0.0], 1.0, 100, 1e-10);
        assert!((norm(&s.p) - 1.0).abs() < 1e-12);
        assert!(s.model < 0.0);
        assert!((s.model - exact_tr_2d(&h, &[1.0, 0.0], 1.0)).abs() < 1e-8);
    }

    #[test]
    fn steihaug_random_2d() {
        let mut rng = rng_from_seed(77);
        for trial in 0..200 {
            let a = DMatrix::from_fn(2, 2, |_, _| normal(&mut rng));
            let g = [normal(&mut rng), normal(&mut rng)];
            let radius = 0.1 + 2.0 * crate::rng::uniform(&mut rng);
            let h = if trial % 2 == 0 { &a * a.transpose() + DMatrix::identity(2, 2) * 0.1 } else { (&a + a.transpose()) * 0.5 };
            let s = cg_steihaug(&mut dense_op(h.clone()), &g, radius, 100, 1e-12);
            let exact = exact_tr_2d(&h, &g, radius);
            assert!(norm(&s.p) <= radius + 1e-12);
            assert!(s.model <= 0.0);
            assert!(s.model >= exact - 1e-8);
            let pd = h.symmetric_eigenvalues().min() > 0.0;
            let newton = h.clone().try_inverse().map(|hi| hi * DVector::from_column_slice(&g));
            if pd && newton.map(|p| p.norm() < radius).unwrap_or(false) {
                assert!((s.model - exact).abs() < 1e-8);
            }
            // Cauchy decrease: at least half the reduction of the best gradient step
            let gv = DVector::from_column_slice(&g);
            let gn = gv.norm();
            let ghg = gv.dot(&(&h * &gv));
            let tau = if ghg <= 0.0 { 1.0 } else { (gn.powi(3) / (radius * ghg)).min(1.0) };
            let pc = -(&gv) * (tau * radius / gn);
            let mc = gv.dot(&pc) + 0.5 * pc.dot(&(&h * &pc));
            assert!(s.model <= mc + 1e-10);
        }
    }
}
