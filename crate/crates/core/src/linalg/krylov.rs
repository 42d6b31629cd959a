//! CG, MINRES and restarted GMRES.
//!
//! Every solver starts from `x0` (or zero), stops once the true residual
//! `|b - A x|` is at most `max(rtol |b|, atol)`, and recomputes the true
//! residual at least every 50 iterations. Preconditioners are diagonal and
//! passed as the inverse diagonal.

use super::{axpy, dot, norm, LinearOperator, SolveReport, SolverOptions};
use crate::error::{FemError, Result};

const CHECK_EVERY: usize = 50;
const GMRES_RESTART: usize = 200;

fn residual(op: &dyn LinearOperator, b: &[f64], x: &[f64], r: &mut [f64]) -> f64 {
    op.apply(x, r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    norm(r)
}

fn check_dims(op: &dyn LinearOperator, b: &[f64], x0: Option<&[f64]>, m: Option<&[f64]>) -> Result<()> {
    let n = op.size();
    for len in [Some(b.len()), x0.map(<[f64]>::len), m.map(<[f64]>::len)].into_iter().flatten() {
        if len != n {
            return Err(FemError::DimensionMismatch { expected: n, got: len });
        }
    }
    Ok(())
}

fn precondition(m: Option<&[f64]>, r: &[f64], z: &mut [f64]) {
    match m {
        Some(d) => z.iter_mut().zip(r.iter().zip(d)).for_each(|(z, (r, d))| *z = r * d),
        None => z.copy_from_slice(r),
    }
}

fn report(
    solver: &'static str,
    converged: bool,
    iterations: usize,
    final_residual_norm: f64,
    residual_history: Vec<f64>,
) -> SolveReport {
    SolveReport { solver, converged, iterations, final_residual_norm, residual_history }
}

/// Preconditioned conjugate gradients for SPD operators.
pub fn cg(
    op: &dyn LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    inv_diag: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    check_dims(op, b, x0, inv_diag)?;
    let n = op.size();
    let tol = opts.target(norm(b));
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    let mut rnorm = residual(op, b, &x, &mut r);
    let mut history = Vec::new();
    if rnorm <= tol {
        return Ok((x, report("CG", true, 0, rnorm, history)));
    }
    let mut z = vec![0.0; n];
    precondition(inv_diag, &r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    for it in 1..=opts.maxiter {
        op.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            // operator not positive definite along p
            let rn = residual(op, b, &x, &mut r);
            return Ok((x, report("CG", rn <= tol, it - 1, rn, history)));
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        rnorm = norm(&r);
        let mut restart = false;
        if it % CHECK_EVERY == 0 || rnorm <= tol {
            rnorm = residual(op, b, &x, &mut r);
            restart = true;
        }
        history.push(rnorm);
        if rnorm <= tol {
            return Ok((x, report("CG", true, it, rnorm, history)));
        }
        precondition(inv_diag, &r, &mut z);
        let rz_new = dot(&r, &z);
        if restart {
            p.copy_from_slice(&z);
        } else {
            let beta = rz_new / rz;
            p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
        }
        rz = rz_new;
    }
    let rn = residual(op, b, &x, &mut r);
    Ok((x, report("CG", rn <= tol, opts.maxiter, rn, history)))
}

/// MINRES (Paige-Saunders) for symmetric, possibly indefinite operators.
///
/// With a preconditioner the recurrence tracks the residual in the
/// preconditioned norm, so the true residual is then checked every 5 steps.
pub fn minres(
    op: &dyn LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    inv_diag: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    check_dims(op, b, x0, inv_diag)?;
    let n = op.size();
    let tol = opts.target(norm(b));
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r1 = vec![0.0; n];
    let mut rnorm = residual(op, b, &x, &mut r1);
    let mut history = Vec::new();
    if rnorm <= tol {
        return Ok((x, report("MINRES", true, 0, rnorm, history)));
    }
    let mut y = vec![0.0; n];
    precondition(inv_diag, &r1, &mut y);
    let beta1 = dot(&r1, &y).sqrt();
    if !(beta1 > 0.0) {
        return Err(FemError::InvalidArgument("MINRES preconditioner is not positive definite".into()));
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for it in 1..=opts.maxiter {
        let s = 1.0 / beta;
        v.iter_mut().zip(&y).for_each(|(v, y)| *v = s * y);
        op.apply(&v, &mut y);
        if it >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        precondition(inv_diag, &r2, &mut y);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        // w_new = (v - oldeps w1 - delta w2) / gamma, with w1 = old w2, w2 = old w
        for i in 0..n {
            let wn = (v[i] - oldeps * w2[i] - delta * w[i]) / gamma;
            w2[i] = w[i];
            w[i] = wn;
        }
        axpy(phi, &w, &mut x);
        history.push(phibar);

        let estimate_met = inv_diag.is_none() && phibar <= tol;
        let breakdown = beta <= f64::EPSILON * beta1;
        if estimate_met || breakdown || it % CHECK_EVERY == 0 || (inv_diag.is_some() && it % 5 == 0) {
            rnorm = residual(op, b, &x, &mut scratch);
            if rnorm <= tol {
                return Ok((x, report("MINRES", true, it, rnorm, history)));
            }
            if breakdown {
                return Ok((x, report("MINRES", false, it, rnorm, history)));
            }
        }
    }
    rnorm = residual(op, b, &x, &mut scratch);
    Ok((x, report("MINRES", rnorm <= tol, opts.maxiter, rnorm, history)))
}

/// Right-preconditioned GMRES restarted every 200 steps, for nonsymmetric
/// operators.
pub fn gmres(
    op: &dyn LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    inv_diag: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    check_dims(op, b, x0, inv_diag)?;
    gmres_impl(op, b, x0, &|r: &[f64], z: &mut [f64]| precondition(inv_diag, r, z), opts)
}

/// GMRES with a general right preconditioner: `prec.apply(r, z)` computes
/// `z = M^-1 r`. `prec` must be linear and fixed during the solve.
pub fn gmres_with(
    op: &dyn LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    prec: &dyn LinearOperator,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    check_dims(op, b, x0, None)?;
    if prec.size() != op.size() {
        return Err(FemError::DimensionMismatch { expected: op.size(), got: prec.size() });
    }
    gmres_impl(op, b, x0, &|r: &[f64], z: &mut [f64]| prec.apply(r, z), opts)
}

fn gmres_impl(
    op: &dyn LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    prec: &dyn Fn(&[f64], &mut [f64]),
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = op.size();
    let tol = opts.target(norm(b));
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    let mut history = Vec::new();
    let mut it = 0;
    let m = GMRES_RESTART.min(n.max(1));
    let mut z = vec![0.0; n];
    loop {
        let beta = residual(op, b, &x, &mut r);
        if beta <= tol || it >= opts.maxiter {
            return Ok((x, report("GMRES", beta <= tol, it, beta, history)));
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut givens: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut steps = 0;
        for j in 0..m {
            prec(&basis[j], &mut z);
            let mut wv = vec![0.0; n];
            op.apply(&z, &mut wv);
            let mut col = vec![0.0; j + 2];
            for (i, vi) in basis.iter().enumerate() {
                col[i] = dot(&wv, vi);
                axpy(-col[i], vi, &mut wv);
            }
            let wn = norm(&wv);
            col[j + 1] = wn;
            for (i, &(c, s)) in givens.iter().enumerate() {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = c * a + s * bb;
                col[i + 1] = -s * a + c * bb;
            }
            let d = col[j].hypot(col[j + 1]);
            let (c, s) = if d == 0.0 { (1.0, 0.0) } else { (col[j] / d, col[j + 1] / d) };
            col[j] = d;
            col[j + 1] = 0.0;
            givens.push((c, s));
            g[j + 1] = -s * g[j];
            g[j] *= c;
            h.push(col);
            steps = j + 1;
            it += 1;
            let est = g[j + 1].abs();
            history.push(est);
            if est <= tol || it >= opts.maxiter || wn == 0.0 {
                break;
            }
            basis.push(wv.iter().map(|v| v / wn).collect());
        }
        // back substitution on the triangular factor
        let mut yv = vec![0.0; steps];
        for i in (0..steps).rev() {
            let s: f64 = (i + 1..steps).map(|k| h[k][i] * yv[k]).sum();
            yv[i] = (g[i] - s) / h[i][i];
        }
        let mut update = vec![0.0; n];
        for (k, vk) in basis.iter().take(steps).enumerate() {
            axpy(yv[k], vk, &mut update);
        }
        prec(&update.clone(), &mut update);
        axpy(1.0, &update, &mut x);
    }
}
