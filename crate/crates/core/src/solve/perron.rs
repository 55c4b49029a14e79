//! Monotone iteration upward from a subsolution, clipped by a supersolution.

use super::iterate::{gamma_warnings, local_solve, sup, sweep_order, Monitor, SolveResult};
use super::scheme::{Method, SchemeMap};
use crate::error::{Error, Result};
use crate::grid::GridFn;

fn worst<I: Iterator<Item = (usize, f64)>>(it: I) -> Option<(usize, f64)> {
    it.fold(None, |acc, (i, v)| match acc {
        Some((_, w)) if w >= v => acc,
        _ => Some((i, v)),
    })
}

/// Iterates `u <- min(upper, max(u, T(u)))` from `lower`; Gauss–Seidel mode
/// replaces `T` by exact node solves. Every iterate is nodewise nondecreasing
/// and stays between the bounds.
pub fn perron_solve(scheme: &SchemeMap, lower: &GridFn, upper: &GridFn) -> Result<SolveResult> {
    scheme.check_input(lower)?;
    scheme.check_input(upper)?;
    let tol = scheme.params().residual_tol;
    let lo = lower.values();
    let hi = upper.values();
    if let Some((node, gap)) = worst((0..lo.len()).map(|i| (i, lo[i] - hi[i]))) {
        if gap > 0.0 {
            return Err(Error::Precondition {
                node,
                detail: format!("lower exceeds upper by {gap:e}"),
            });
        }
    }
    let r_lo = scheme.residual_values(lo);
    if let Some((node, r)) = worst(r_lo.iter().copied().enumerate()) {
        if r > tol {
            return Err(Error::Precondition {
                node,
                detail: format!("lower is not a discrete subsolution: residual {r:e}"),
            });
        }
    }
    let r_hi = scheme.residual_values(hi);
    if let Some((node, r)) = worst(r_hi.iter().map(|v| -v).enumerate()) {
        if r > tol {
            return Err(Error::Precondition {
                node,
                detail: format!("upper is not a discrete supersolution: residual {:e}", -r),
            });
        }
    }

    let params = scheme.params();
    let mut u = lo.to_vec();
    let mut mon = Monitor::new();
    let mut res = sup(&r_lo);
    mon.record(0, &u, res)?;
    let orders: Vec<Vec<usize>> = (0..1 << scheme.grid().dim()).map(|k| sweep_order(scheme, k)).collect();
    let mut iters = 0;
    while res > tol && iters < params.max_iter {
        iters += 1;
        match params.method {
            Method::GaussSeidel => {
                for &i in &orders[(iters - 1) % orders.len()] {
                    let old = u[i];
                    let s = local_solve(scheme, &mut u, i, tol);
                    u[i] = s.max(old).min(hi[i]);
                }
            }
            _ => {
                let t = scheme.euler_values(&u);
                for i in 0..u.len() {
                    u[i] = u[i].max(t[i]).min(hi[i]);
                }
            }
        }
        res = sup(&scheme.residual_values(&u));
        mon.record(iters, &u, res)?;
    }
    Ok(SolveResult {
        u: lower.with_values(u)?,
        iters,
        residual: res,
        converged: res <= tol,
        trace: mon.trace,
        contraction: None,
        warnings: gamma_warnings(scheme),
    })
}
