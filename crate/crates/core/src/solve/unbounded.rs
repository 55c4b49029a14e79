//! `u + G(Du, D²u) = f` on the whole space by solves on growing boxes.

use std::sync::Arc;

use super::iterate::solve_fixed_point;
use super::scheme::{discretize, SchemeParams};
use crate::boundary::{BoundarySpec, Sense};
use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFn};
use crate::matrix::SymMatrix;
use crate::operator::OperatorSpec;
use crate::operators::ScalarField;

#[derive(Clone)]
pub struct UnboundedProblem {
    /// `G(p, X)`; evaluated with `x` and `r` ignored.
    pub g: OperatorSpec,
    pub f: ScalarField,
    /// Linear growth constant of `f`; used as the slope of the barrier.
    pub growth: f64,
    /// Common grid spacing of every box.
    pub h: f64,
    /// Half-widths of the boxes `[-R, R]^N`, increasing multiples of `h`.
    pub radii: Vec<f64>,
    pub params: SchemeParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxReport {
    pub radius: f64,
    pub iters: usize,
    pub residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct UnboundedResult {
    /// Solution on the largest box.
    pub u: GridFn,
    pub boxes: Vec<BoxReport>,
    /// `sup` over the smallest box of `|u_k - u_{k+1}|` for consecutive boxes.
    pub stabilization: Vec<f64>,
    /// Barrier `A + B <x>` used as Dirichlet data.
    pub a: f64,
    pub b: f64,
}

fn bracket(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Value, gradient and Hessian of `<x> = (1 + |x|²)^{1/2}`.
fn bracket_jet(x: &[f64]) -> (f64, Vec<f64>, SymMatrix) {
    let s = bracket(x);
    let p: Vec<f64> = x.iter().map(|v| v / s).collect();
    let m = SymMatrix::from_upper(x.len(), |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        (id - x[i] * x[j] / (s * s)) / s
    });
    (s, p, m)
}

fn steps(r: f64, h: f64) -> Result<usize> {
    let k = r / h;
    if (k - k.round()).abs() > 1e-9 * k.max(1.0) || k.round() < 1.0 {
        return invalid(format!("radius {r} is not a positive multiple of h = {h}"));
    }
    Ok(k.round() as usize)
}

pub fn solve_unbounded(prob: &UnboundedProblem) -> Result<UnboundedResult> {
    let dim = prob.g.dim();
    if prob.radii.is_empty() {
        return invalid("empty box schedule");
    }
    if !(prob.h > 0.0) || !(prob.growth >= 0.0) {
        return invalid("h must be positive and the growth constant nonnegative");
    }
    let ks = prob.radii.iter().map(|r| steps(*r, prob.h)).collect::<Result<Vec<_>>>()?;
    if ks.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("box radii must increase");
    }
    let b = prob.growth;
    let last = *ks.last().unwrap();
    let big = Grid::cube(dim, -(last as f64) * prob.h, last as f64 * prob.h, 2 * last + 1)?;
    let mut a = f64::NEG_INFINITY;
    for i in 0..big.len() {
        let x = big.point(i);
        let (s, p, m) = bracket_jet(&x);
        let v = (prob.f)(&x) - b * s - prob.g.try_evaluate(&x, 0.0, &scaled(&p, b), &m.scale(b))?;
        a = a.max(v);
    }
    let g = prob.g.clone();
    let f = prob.f.clone();
    let op = OperatorSpec::new(dim, format!("u + {} - f", g.name()), move |x, r, p, m| r + g.evaluate(x, 0.0, p, m) - f(x))
        .with_gamma(1.0);
    let op = if prob.g.first_order_only() { op.first_order() } else { op };
    let bc = BoundarySpec::dirichlet(dim, move |x| a + b * bracket(x), Sense::Strong);

    let mut boxes = Vec::new();
    let mut sols: Vec<GridFn> = Vec::new();
    let mut stabilization = Vec::new();
    for (j, &k) in ks.iter().enumerate() {
        let r = k as f64 * prob.h;
        let grid = Arc::new(Grid::cube(dim, -r, r, 2 * k + 1)?);
        let scheme = discretize(&op, grid.clone(), &bc, prob.params.clone())?;
        let mut init = GridFn::from_fn(grid.clone(), |x| a + b * bracket(x))?.into_values();
        if let Some(prev) = sols.last() {
            let shift = k - ks[j - 1];
            copy_inner(prev, &grid, shift, &mut init, true);
        }
        let out = solve_fixed_point(&scheme, &GridFn::new(grid.clone(), init)?)?;
        boxes.push(BoxReport {
            radius: r,
            iters: out.iters,
            residual: out.residual,
            converged: out.converged,
        });
        if let Some(prev) = sols.last() {
            stabilization.push(inner_distance(prev, ks[j - 1], &out.u, k, ks[0]));
            let n = stabilization.len();
            if n >= 3 && stabilization[n - 3] < stabilization[n - 2] && stabilization[n - 2] < stabilization[n - 1] {
                return Err(Error::Stabilization(format!(
                    "interior differences increase across boxes: {:?}",
                    &stabilization[n - 3..]
                )));
            }
        }
        sols.push(out.u);
    }
    Ok(UnboundedResult {
        u: sols.pop().unwrap(),
        boxes,
        stabilization,
        a,
        b,
    })
}

fn scaled(p: &[f64], s: f64) -> Vec<f64> {
    p.iter().map(|v| v * s).collect()
}

/// Copies `small` into the centred sub-box of `big` offset by `shift` cells.
fn copy_inner(small: &GridFn, big: &Grid, shift: usize, out: &mut [f64], skip_edge: bool) {
    let sg = small.grid();
    let dim = sg.dim();
    let mut m = vec![0usize; dim];
    for i in 0..sg.len() {
        if skip_edge && sg.is_boundary(i) {
            continue;
        }
        sg.multi_index_into(i, &mut m);
        for v in m.iter_mut() {
            *v += shift;
        }
        out[big.index(&m)] = small.get(i);
    }
}

/// `sup |u - v|` over the centred box of half-width `k0` cells.
fn inner_distance(u: &GridFn, ku: usize, v: &GridFn, kv: usize, k0: usize) -> f64 {
    let dim = u.grid().dim();
    let inner = Grid::cube(dim, 0.0, 1.0, 2 * k0 + 1).expect("inner box");
    let mut m = vec![0usize; dim];
    let mut worst = 0.0_f64;
    for i in 0..inner.len() {
        inner.multi_index_into(i, &mut m);
        let mu: Vec<usize> = m.iter().map(|x| x + ku - k0).collect();
        let mv: Vec<usize> = m.iter().map(|x| x + kv - k0).collect();
        worst = worst.max((u.get(u.grid().index(&mu)) - v.get(v.grid().index(&mv))).abs());
    }
    worst
}
