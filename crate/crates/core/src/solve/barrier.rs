//! Exponential boundary barriers `M(1 - e^{-λ d})` capped at a constant.

use std::sync::Arc;

use rayon::prelude::*;

use crate::boundary::{BoundarySpec, FaceCondition};
use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFn};
use crate::jets::{certify, JetProbeConfig, Region, Side};
use crate::matrix::SymMatrix;
use crate::operator::OperatorSpec;

/// Number of sampled factors in `[M/e, M]` for the band inequality.
const BAND_SAMPLES: usize = 9;

#[derive(Debug, Clone)]
pub struct Barrier {
    pub m: f64,
    pub lambda: f64,
    pub c: f64,
    /// Distance to the Dirichlet part of the boundary.
    pub d: GridFn,
    /// `min(M(1 - e^{-λ d}), C)`.
    pub u1: GridFn,
}

/// Exact distance from every node to the nearest node on a Dirichlet face.
pub fn distance_to_dirichlet(grid: &Arc<Grid>, bc: &BoundarySpec) -> Result<GridFn> {
    bc.validate(grid)?;
    let targets: Vec<Vec<f64>> = (0..grid.len())
        .filter(|&i| {
            grid.faces_of(i)
                .iter()
                .any(|f| matches!(bc.face(*f).condition, FaceCondition::Dirichlet { .. }))
        })
        .map(|i| grid.point(i))
        .collect();
    if targets.is_empty() {
        return invalid("no Dirichlet face to measure distance from");
    }
    let vals = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            targets
                .iter()
                .map(|t| t.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect();
    GridFn::new(grid.clone(), vals)
}

/// Centered first and second differences of `d`, one-sided at the box edges.
fn derivatives(d: &GridFn, i: usize) -> (Vec<f64>, SymMatrix) {
    let g = d.grid();
    let dim = g.dim();
    let at = |off: &[isize]| g.offset(i, off).map(|j| d.get(j));
    let mut p = vec![0.0; dim];
    let mut x = SymMatrix::zeros(dim);
    let d0 = d.get(i);
    for k in 0..dim {
        let h = g.h()[k];
        let mut e = vec![0isize; dim];
        e[k] = 1;
        let up = at(&e);
        e[k] = -1;
        let dn = at(&e);
        e[k] = 2;
        let up2 = at(&e);
        e[k] = -2;
        let dn2 = at(&e);
        let (dk, dkk) = match (dn, up) {
            (Some(a), Some(b)) => ((b - a) / (2.0 * h), (a + b - 2.0 * d0) / (h * h)),
            (None, Some(b)) => ((b - d0) / h, up2.map_or(0.0, |c| (c - 2.0 * b + d0) / (h * h))),
            (Some(a), None) => ((d0 - a) / h, dn2.map_or(0.0, |c| (c - 2.0 * a + d0) / (h * h))),
            (None, None) => (0.0, 0.0),
        };
        p[k] = dk;
        x.set(k, k, dkk);
        for l in k + 1..dim {
            let hl = g.h()[l];
            let q = |sk: isize, sl: isize| {
                let mut o = vec![0isize; dim];
                o[k] = sk;
                o[l] = sl;
                at(&o)
            };
            if let (Some(a), Some(b), Some(c), Some(e)) = (q(1, 1), q(-1, -1), q(1, -1), q(-1, 1)) {
                x.set(k, l, ((a + b) - (c + e)) / (4.0 * h * hl));
            }
        }
    }
    (p, x)
}

fn g_at_zero(g: &OperatorSpec, x: &[f64]) -> Result<f64> {
    g.try_evaluate(x, 0.0, &vec![0.0; x.len()], &SymMatrix::zeros(x.len()))
}

/// Checks the barrier inequalities for `u + G(x, Du, D²u) = 0` with zero
/// data on the Dirichlet faces and returns the capped barrier. `G` is
/// evaluated with `r = 0`.
pub fn build_barrier(grid: &Arc<Grid>, bc: &BoundarySpec, g: &OperatorSpec, m: f64, lambda: f64, c: f64) -> Result<Barrier> {
    if g.dim() != grid.dim() {
        return Err(Error::Dimension {
            expected: grid.dim(),
            got: g.dim(),
        });
    }
    if !(m > 0.0 && lambda > 0.0 && c > 0.0) {
        return invalid("M, lambda and C must be positive");
    }
    let top = m * (1.0 - (-1.0f64).exp());
    if !(c < top) {
        return Err(Error::Barrier {
            index: "cap-range",
            detail: format!("C = {c} is not below M(1 - 1/e) = {top}"),
        });
    }
    let d = distance_to_dirichlet(grid, bc)?;
    for i in 0..grid.len() {
        let x = grid.point(i);
        let g0 = g_at_zero(g, &x)?;
        if !(top + g0 > 1.0) {
            return Err(Error::Barrier {
                index: "mass",
                detail: format!("M(1 - 1/e) + G(x,0,0) = {} <= 1 at x = {x:?}", top + g0),
            });
        }
        if !(c + g0 >= 0.0) {
            return Err(Error::Barrier {
                index: "cap-operator",
                detail: format!("C + G(x,0,0) = {} < 0 at x = {x:?}", c + g0),
            });
        }
    }
    let e_inv = (-1.0f64).exp();
    for i in 0..grid.len() {
        if lambda * d.get(i) > 1.0 {
            continue;
        }
        let x = grid.point(i);
        let (dd, d2) = derivatives(&d, i);
        let outer = SymMatrix::outer(&dd);
        for s in 0..BAND_SAMPLES {
            let k = m * (e_inv + (1.0 - e_inv) * s as f64 / (BAND_SAMPLES - 1) as f64);
            let p: Vec<f64> = dd.iter().map(|v| k * lambda * v).collect();
            let xm = &d2.scale(k * lambda) - &outer.scale(k * lambda * lambda);
            let v = g.try_evaluate(&x, 0.0, &p, &xm)?;
            if v < -1e-9 * (1.0 + v.abs()) {
                return Err(Error::Barrier {
                    index: "band",
                    detail: format!("G = {v} < 0 at x = {x:?} with c = {k}"),
                });
            }
        }
    }
    let u1 = d.map(|t| (m * -(-lambda * t).exp_m1()).min(c))?;
    // zero extension check as a viscosity supersolution of u + G
    let gg = g.clone();
    let full = OperatorSpec::new(grid.dim(), format!("u + {}", g.name()), move |x, r, p, xm| r + gg.evaluate(x, 0.0, p, xm));
    let cfg = JetProbeConfig::for_grid(grid).with_tol(10.0 * grid.max_h());
    let report = certify(&u1, &full, Region::Interior, Side::Super, None, &cfg)?;
    if let Some(f) = report.failures.first() {
        return Err(Error::Barrier {
            index: "supersolution",
            detail: format!("certification fails at node {} with residual {}", f.node, f.residual),
        });
    }
    Ok(Barrier {
        m,
        lambda,
        c,
        d,
        u1,
    })
}

/// Smallest `λ` among `candidates` (tried in increasing order) for which
/// the barrier validates.
pub fn minimal_barrier_lambda(
    grid: &Arc<Grid>,
    bc: &BoundarySpec,
    g: &OperatorSpec,
    m: f64,
    c: f64,
    candidates: &[f64],
) -> Result<Option<f64>> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    for l in sorted {
        match build_barrier(grid, bc, g, m, l, c) {
            Ok(_) => return Ok(Some(l)),
            Err(Error::Barrier { index: "band" | "supersolution", .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}
