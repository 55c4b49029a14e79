//! Jacobi, Gauss–Seidel and Newton iterations for `R(u) = 0`.

use rayon::prelude::*;

use super::scheme::{Method, SchemeMap};
use crate::error::{Error, Result};
use crate::grid::GridFn;

/// Consecutive residual increases tolerated before giving up.
const DIVERGENCE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub residual_sup: f64,
    pub min_u: f64,
    pub max_u: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: GridFn,
    pub iters: usize,
    /// Sup norm of the residual at the returned iterate.
    pub residual: f64,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
    /// Largest observed ratio of successive Jacobi update norms.
    pub contraction: Option<f64>,
    pub warnings: Vec<String>,
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) })
}

fn row(iter: usize, u: &[f64], residual_sup: f64) -> TraceRow {
    let (min_u, max_u) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    TraceRow {
        iter,
        residual_sup,
        min_u,
        max_u,
    }
}

pub(crate) fn gamma_warnings(scheme: &SchemeMap) -> Vec<String> {
    match scheme.op().gamma() {
        Some(g) if g > 0.0 => Vec::new(),
        _ => vec![format!(
            "operator '{}' has no positive gamma; the fixed point need not be unique",
            scheme.op().name()
        )],
    }
}

/// Tracks the residual history and reports divergence.
pub(crate) struct Monitor {
    pub trace: Vec<TraceRow>,
    run: usize,
    last: f64,
}

impl Monitor {
    pub fn new() -> Self {
        Self {
            trace: Vec::new(),
            run: 0,
            last: f64::INFINITY,
        }
    }

    pub fn record(&mut self, iter: usize, u: &[f64], res: f64) -> Result<()> {
        self.trace.push(row(iter, u, res));
        if !res.is_finite() || u.iter().any(|v| !v.is_finite()) {
            return Err(self.divergence());
        }
        if res > self.last {
            self.run += 1;
            if self.run >= DIVERGENCE_RUN {
                return Err(self.divergence());
            }
        } else {
            self.run = 0;
        }
        self.last = res;
        Ok(())
    }

    fn divergence(&self) -> Error {
        let tail = self.trace.len().saturating_sub(DIVERGENCE_RUN + 1);
        Error::Divergence {
            trace: self.trace[tail..].iter().map(|r| r.residual_sup).collect(),
        }
    }
}

/// Node order of sweep `k`: axis `a` runs backwards when bit `a` of `k` is set.
pub(crate) fn sweep_order(scheme: &SchemeMap, k: usize) -> Vec<usize> {
    let g = scheme.grid();
    let dim = g.dim();
    let mask = k % (1 << dim);
    let mut out = Vec::with_capacity(g.len());
    let mut multi = vec![0usize; dim];
    g.multi_index_into(0, &mut multi);
    for idx in 0..g.len() {
        g.multi_index_into(idx, &mut multi);
        for a in 0..dim {
            if mask >> a & 1 == 1 {
                multi[a] = g.n()[a] - 1 - multi[a];
            }
        }
        out.push(g.index(&multi));
    }
    out
}

/// Solves `R_i(u) = 0` in the variable `u_i`, leaving the other entries.
/// Falls back to the best point seen if no sign change is found.
pub(crate) fn local_solve(scheme: &SchemeMap, u: &mut [f64], i: usize, tol: f64) -> f64 {
    let s0 = u[i];
    let r0 = scheme.residual_at(u, i);
    if !r0.is_finite() || r0.abs() <= tol * 1e-3 {
        return s0;
    }
    let eval = |s: f64, u: &mut [f64]| {
        u[i] = s;
        scheme.residual_at(u, i)
    };
    let mut step = -scheme.tau() * r0;
    let (mut a, mut fa) = (s0, r0);
    let mut best = (s0, r0.abs());
    let mut bracket = None;
    for _ in 0..64 {
        let b = a + step;
        let fb = eval(b, u);
        if !fb.is_finite() {
            break;
        }
        if fb.abs() < best.1 {
            best = (b, fb.abs());
        }
        if fb == 0.0 {
            u[i] = b;
            return b;
        }
        if (fb > 0.0) != (fa > 0.0) {
            bracket = Some((a, fa, b, fb));
            break;
        }
        a = b;
        fa = fb;
        step *= 2.0;
    }
    let Some((mut a, mut fa, mut b, mut fb)) = bracket else {
        u[i] = best.0;
        return best.0;
    };
    // Illinois variant of regula falsi
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c.is_finite() && c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
        let fc = eval(c, u);
        if fc == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * (1.0 + c.abs()) {
            u[i] = c;
            return c;
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if fc.abs() <= tol * 1e-3 {
            u[i] = c;
            return c;
        }
    }
    let c = if fa.abs() < fb.abs() { a } else { b };
    u[i] = c;
    c
}

/// Iterates the scheme from `init` until the sup-norm residual is below
/// the tolerance or the iteration budget is spent.
pub fn solve_fixed_point(scheme: &SchemeMap, init: &GridFn) -> Result<SolveResult> {
    scheme.check_input(init)?;
    let params = scheme.params();
    let tol = params.residual_tol;
    let mut u = init.values().to_vec();
    let mut mon = Monitor::new();
    let mut res = sup(&scheme.residual_values(&u));
    mon.record(0, &u, res)?;
    let mut contraction: Option<f64> = None;
    let mut prev_update: Option<f64> = None;
    let mut iters = 0;
    let orders: Vec<Vec<usize>> = if params.method == Method::GaussSeidel {
        (0..1 << scheme.grid().dim()).map(|k| sweep_order(scheme, k)).collect()
    } else {
        Vec::new()
    };
    while res > tol && iters < params.max_iter {
        iters += 1;
        match params.method {
            Method::Jacobi => {
                let next = scheme.euler_values(&u);
                let upd = next.iter().zip(&u).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                // ratios of updates near rounding level are noise
                let floor = 1e-6 * (1.0 + u.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
                if let Some(p) = prev_update {
                    if p > floor && upd > floor {
                        let q = upd / p;
                        contraction = Some(contraction.map_or(q, |c: f64| c.max(q)));
                    }
                }
                prev_update = Some(upd);
                u = next;
            }
            Method::GaussSeidel => {
                let order = &orders[(iters - 1) % orders.len()];
                for &i in order {
                    local_solve(scheme, &mut u, i, tol);
                }
            }
            Method::Newton => newton_step(scheme, &mut u, res)?,
        }
        res = sup(&scheme.residual_values(&u));
        mon.record(iters, &u, res)?;
    }
    let mut warnings = gamma_warnings(scheme);
    if let (Some(c), Some(g)) = (contraction, scheme.op().gamma()) {
        let bound = 1.0 - scheme.tau() * g;
        if g > 0.0 && c > bound + 1e-9 {
            warnings.push(format!("observed contraction {c} exceeds 1 - tau*gamma = {bound}"));
        }
    }
    Ok(SolveResult {
        u: init.with_values(u)?,
        iters,
        residual: res,
        converged: res <= tol,
        trace: mon.trace,
        contraction,
        warnings,
    })
}

/// Banded matrix stored by rows, columns `i - bw ..= i + bw`.
struct Banded {
    n: usize,
    bw: usize,
    a: Vec<f64>,
}

impl Banded {
    fn new(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            a: vec![0.0; n * (2 * bw + 1)],
        }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        i * (2 * self.bw + 1) + (j + self.bw - i)
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.a[s] = v;
    }

    /// In-place LU without pivoting, then solves `A x = b`. `None` on a
    /// vanishing pivot.
    fn solve(mut self, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let (n, bw) = (self.n, self.bw);
        for k in 0..n {
            let piv = self.a[self.slot(k, k)];
            if !(piv.abs() > 1e-300) || !piv.is_finite() {
                return None;
            }
            let last = (k + bw).min(n - 1);
            for i in k + 1..=last {
                let sik = self.slot(i, k);
                let l = self.a[sik] / piv;
                if l == 0.0 {
                    continue;
                }
                self.a[sik] = l;
                for j in k + 1..=last {
                    let skj = self.slot(k, j);
                    let sij = self.slot(i, j);
                    self.a[sij] -= l * self.a[skj];
                }
                b[i] -= l * b[k];
            }
        }
        for k in (0..n).rev() {
            let last = (k + bw).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=last {
                s -= self.a[self.slot(k, j)] * b[j];
            }
            b[k] = s / self.a[self.slot(k, k)];
        }
        b.iter().all(|v| v.is_finite()).then_some(b)
    }
}

/// One damped Newton step with a finite-difference Jacobian assembled by
/// `3^N` colouring; falls back to a Jacobi step when the line search fails.
fn newton_step(scheme: &SchemeMap, u: &mut Vec<f64>, res: f64) -> Result<()> {
    let g = scheme.grid().clone();
    let dim = g.dim();
    let n = g.len();
    let bw: usize = g.strides().iter().sum();
    let r0 = scheme.residual_values(u);
    let mut jac = Banded::new(n, bw);
    let colours = 3usize.pow(dim as u32);
    let colour_of = |idx: usize| {
        let mut c = 0;
        let mut m = 1;
        for a in 0..dim {
            c += (g.axis_index(idx, a) % 3) * m;
            m *= 3;
        }
        c
    };
    let colour: Vec<usize> = (0..n).map(colour_of).collect();
    for c in 0..colours {
        let mut w = u.clone();
        let mut delta = vec![0.0; n];
        for j in 0..n {
            if colour[j] == c {
                delta[j] = 1e-6 * u[j].abs().max(1.0);
                w[j] += delta[j];
            }
        }
        let rw: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| scheme.residual_at(&w, i))
            .collect();
        for i in 0..n {
            // the unique perturbed node within one cell of i
            let mut off = vec![-1isize; dim];
            loop {
                if let Some(j) = g.offset(i, &off) {
                    if colour[j] == c {
                        jac.set(i, j, (rw[i] - r0[i]) / delta[j]);
                    }
                }
                let mut a = 0;
                while a < dim && off[a] == 1 {
                    off[a] = -1;
                    a += 1;
                }
                if a == dim {
                    break;
                }
                off[a] += 1;
            }
        }
    }
    if let Some(dx) = jac.solve(r0.clone()) {
        let mut t = 1.0;
        for _ in 0..30 {
            let trial: Vec<f64> = u.iter().zip(&dx).map(|(a, d)| a - t * d).collect();
            let r = sup(&scheme.residual_values(&trial));
            if r.is_finite() && r < res {
                *u = trial;
                return Ok(());
            }
            t *= 0.5;
        }
    }
    *u = scheme.euler_values(u);
    Ok(())
}
