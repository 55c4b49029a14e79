//! Monotone finite-difference discretization `R(u)` and the Euler map
//! `T(u) = u - τ R(u)`.
//!
//! Every gradient slot is discretized Godunov style: with backward and
//! forward quotients `a`, `b`, the operator is minimized over `[a, b]` when
//! `a <= b` and maximized over `[b, a]` otherwise. Off-diagonal Hessian
//! entries are treated the same way between the two mixed-difference
//! estimates. Sup/inf families are discretized member by member.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::boundary::{BoundarySpec, FaceCondition, Sense};
use crate::error::{invalid, Error, Result};
use crate::grid::{Face, Grid, GridFn};
use crate::matrix::SymMatrix;
use crate::operator::{Kind, OperatorSpec};

/// Stand-in for an unbounded half-line of gradients at a boundary node.
pub const HALF_LINE: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Jacobi,
    GaussSeidel,
    Newton,
}

/// Which inequality a viscosity-sense boundary node enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViscositySide {
    /// `min(F, B)`
    Sub,
    /// `max(F, B)`
    Super,
    /// `B` clamped between the super and sub discretizations of `F`; a zero
    /// satisfies both one-sided inequalities.
    Both,
}

/// Candidate gradients inside a Godunov interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PRule {
    /// The endpoints, plus 0 when it lies strictly inside. Exact for operators
    /// that are monotone or quasi-convex about 0 in each gradient slot.
    Endpoints,
    /// Endpoints rounded to a fixed lattice and every lattice point between
    /// them. Monotone for any operator; consistency error of the spacing.
    /// Spacing near 0 is `spacing` and grows by the factor `1 + growth`.
    Lattice { spacing: f64, growth: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    /// Damping; computed from sampled diagonal slopes when `None`.
    pub tau: Option<f64>,
    pub max_iter: usize,
    pub residual_tol: f64,
    pub method: Method,
    pub viscosity_side: ViscositySide,
    pub p_rule: PRule,
    /// Single-node ordered pairs checked at construction.
    pub verify_bumps: usize,
    /// Dense ordered pairs checked at construction.
    pub verify_dense: usize,
    pub seed: u64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            tau: None,
            max_iter: 10_000,
            residual_tol: 1e-10,
            method: Method::GaussSeidel,
            viscosity_side: ViscositySide::Both,
            p_rule: PRule::Endpoints,
            verify_bumps: 256,
            verify_dense: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    Inside,
    Lower,
    Upper,
}

#[derive(Debug, Clone)]
enum Data {
    Dirichlet(f64),
    Oblique { nu: Vec<f64>, f: f64 },
}

#[derive(Debug, Clone)]
enum Role {
    Interior,
    Strong(Face, Data),
    Viscosity(Face, Data),
    StateConstraint,
}

#[derive(Debug, Clone)]
struct NodePlan {
    x: Vec<f64>,
    edges: Vec<Edge>,
    role: Role,
}

/// Extremum taken over one slot's candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ext {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Interior,
    Sub,
    Super,
}

/// The discretized operator on one grid with one boundary specification.
#[derive(Clone)]
pub struct SchemeMap {
    op: OperatorSpec,
    grid: Arc<Grid>,
    bc: BoundarySpec,
    params: SchemeParams,
    tau: f64,
    /// Largest sampled slope of `R_i` in `u_i`.
    slope: f64,
    plans: Arc<Vec<NodePlan>>,
    /// Neighbour indices over the `3^N` offsets, mirrored at the boundary.
    stencil: Arc<Vec<usize>>,
    width: usize,
}

impl std::fmt::Debug for SchemeMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SchemeMap")
            .field("op", &self.op.name())
            .field("nodes", &self.grid.len())
            .field("tau", &self.tau)
            .finish()
    }
}

fn offset_code(off: &[isize]) -> usize {
    let mut c = 0;
    let mut m = 1;
    for o in off {
        c += ((o + 1) as usize) * m;
        m *= 3;
    }
    c
}

fn lattice_snap(v: f64, spacing: f64, growth: f64) -> (f64, i64) {
    // points ±spacing·((1+g)^k - 1)/g, or ±k·spacing for g = 0
    let idx = |a: f64| -> f64 {
        if growth == 0.0 {
            a / spacing
        } else {
            (1.0 + a * growth / spacing).ln() / (1.0 + growth).ln()
        }
    };
    let k = idx(v.abs()).round();
    let k = if v < 0.0 { -k } else { k };
    (lattice_point(k as i64, spacing, growth), k as i64)
}

fn lattice_point(k: i64, spacing: f64, growth: f64) -> f64 {
    let a = k.unsigned_abs() as f64;
    let mag = if growth == 0.0 {
        a * spacing
    } else {
        spacing * ((1.0 + growth).powf(a) - 1.0) / growth
    };
    if k < 0 {
        -mag
    } else {
        mag
    }
}

/// Godunov candidates for an interval slot with quotients `a` (backward)
/// and `b` (forward).
fn interval_slot(a: f64, b: f64, rule: PRule, out: &mut Vec<f64>) -> Ext {
    out.clear();
    match rule {
        PRule::Endpoints => {
            let (lo, hi, ext) = if a <= b { (a, b, Ext::Min) } else { (b, a, Ext::Max) };
            out.push(lo);
            if hi != lo {
                out.push(hi);
            }
            if lo < 0.0 && 0.0 < hi {
                out.push(0.0);
            }
            ext
        }
        PRule::Lattice { spacing, growth } => {
            let (_, ka) = lattice_snap(a, spacing, growth);
            let (_, kb) = lattice_snap(b, spacing, growth);
            let (lo, hi, ext) = if ka <= kb { (ka, kb, Ext::Min) } else { (kb, ka, Ext::Max) };
            for k in lo..=hi {
                out.push(lattice_point(k, spacing, growth));
            }
            ext
        }
    }
}

/// Candidates for the half-line `p <= a` (`below`) or `p >= a`.
fn half_slot(a: f64, below: bool, ext: Ext, out: &mut Vec<f64>) -> Ext {
    out.clear();
    out.push(a);
    if below {
        out.push(a - HALF_LINE);
        if 0.0 < a {
            out.push(0.0);
        }
    } else {
        out.push(a + HALF_LINE);
        if a < 0.0 {
            out.push(0.0);
        }
    }
    ext
}

struct Slots {
    /// Per gradient axis.
    p: Vec<(Ext, Vec<f64>)>,
    /// Per off-diagonal pair `(k, l)`, `k < l`.
    x_off: Vec<(usize, usize, Ext, Vec<f64>)>,
    x_diag: Vec<f64>,
}

fn extremize(ext: Ext, acc: f64, v: f64) -> f64 {
    if v.is_nan() || acc.is_nan() {
        return f64::NAN;
    }
    match ext {
        Ext::Min => acc.min(v),
        Ext::Max => acc.max(v),
    }
}

fn ext_init(ext: Ext) -> f64 {
    match ext {
        Ext::Min => f64::INFINITY,
        Ext::Max => f64::NEG_INFINITY,
    }
}

impl SchemeMap {
    pub fn op(&self) -> &OperatorSpec {
        &self.op
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn bc(&self) -> &BoundarySpec {
        &self.bc
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Nodes whose residual reads `u` at `node`, including itself.
    pub fn dependents(&self, node: usize) -> Vec<usize> {
        let g = &self.grid;
        let dim = g.dim();
        let mut out = Vec::new();
        let mut off = vec![-2isize; dim];
        // mirrored ghosts can reach two cells away from an edge
        loop {
            if let Some(j) = g.offset(node, &off) {
                if self.stencil[j * self.width..(j + 1) * self.width].contains(&node) {
                    out.push(j);
                }
            }
            let mut a = 0;
            loop {
                if a == dim {
                    out.sort_unstable();
                    out.dedup();
                    return out;
                }
                if off[a] < 2 {
                    off[a] += 1;
                    break;
                }
                off[a] = -2;
                a += 1;
            }
        }
    }

    fn at(&self, u: &[f64], i: usize, off: &[isize]) -> f64 {
        u[self.stencil[i * self.width + offset_code(off)]]
    }

    fn slots(&self, u: &[f64], i: usize, mode: Mode, first_order: bool) -> Slots {
        let g = &self.grid;
        let dim = g.dim();
        let plan = &self.plans[i];
        let u0 = u[i];
        let mut off = vec![0isize; dim];
        let mut p = Vec::with_capacity(dim);
        for k in 0..dim {
            let h = g.h()[k];
            off[k] = -1;
            let um = self.at(u, i, &off);
            off[k] = 1;
            let up = self.at(u, i, &off);
            off[k] = 0;
            let a = (u0 - um) / h;
            let b = (up - u0) / h;
            let mut c = Vec::with_capacity(3);
            let ext = match (plan.edges[k], mode) {
                (Edge::Inside, _) | (_, Mode::Interior) => interval_slot(a, b, self.params.p_rule, &mut c),
                (Edge::Upper, Mode::Sub) => half_slot(a, true, Ext::Max, &mut c),
                (Edge::Upper, Mode::Super) => half_slot(a, false, Ext::Min, &mut c),
                (Edge::Lower, Mode::Sub) => half_slot(b, false, Ext::Max, &mut c),
                (Edge::Lower, Mode::Super) => half_slot(b, true, Ext::Min, &mut c),
            };
            p.push((ext, c));
        }
        if first_order {
            return Slots {
                p,
                x_off: Vec::new(),
                x_diag: vec![0.0; dim],
            };
        }
        let mut x_diag = Vec::with_capacity(dim);
        let mut undivided = Vec::with_capacity(dim);
        for k in 0..dim {
            off[k] = 1;
            let up = self.at(u, i, &off);
            off[k] = -1;
            let um = self.at(u, i, &off);
            off[k] = 0;
            let d = (up + um) - 2.0 * u0;
            undivided.push(d);
            x_diag.push(d / (g.h()[k] * g.h()[k]));
        }
        let mut x_off = Vec::new();
        for k in 0..dim {
            for l in k + 1..dim {
                let hh = 2.0 * g.h()[k] * g.h()[l];
                let mut second = |sk: isize, sl: isize| {
                    off[k] = sk;
                    off[l] = sl;
                    let a = self.at(u, i, &off);
                    off[k] = -sk;
                    off[l] = -sl;
                    let b = self.at(u, i, &off);
                    off[k] = 0;
                    off[l] = 0;
                    (a + b) - 2.0 * u0
                };
                let along = second(1, 1);
                let across = second(1, -1);
                let lower = ((undivided[k] + undivided[l]) - across) / hh;
                let upper = (along - (undivided[k] + undivided[l])) / hh;
                let (ext, c) = if lower <= upper {
                    (Ext::Min, vec![lower, upper])
                } else {
                    (Ext::Max, vec![upper, lower])
                };
                x_off.push((k, l, ext, c));
            }
        }
        Slots { p, x_off, x_diag }
    }

    fn leaf_value(&self, f: &dyn Fn(&[f64], f64, &[f64], &SymMatrix) -> f64, x: &[f64], r: f64, slots: &Slots) -> f64 {
        let dim = slots.p.len();
        let mut p = vec![0.0; dim];
        let mut m = SymMatrix::diag(&slots.x_diag);
        fn rec_x(
            f: &dyn Fn(&[f64], f64, &[f64], &SymMatrix) -> f64,
            x: &[f64],
            r: f64,
            p: &[f64],
            m: &mut SymMatrix,
            slots: &Slots,
            s: usize,
        ) -> f64 {
            if s == slots.x_off.len() {
                return f(x, r, p, m);
            }
            let (k, l, ext, ref c) = slots.x_off[s];
            let mut acc = ext_init(ext);
            for v in c {
                m.set(k, l, *v);
                acc = extremize(ext, acc, rec_x(f, x, r, p, m, slots, s + 1));
            }
            acc
        }
        fn rec_p(
            f: &dyn Fn(&[f64], f64, &[f64], &SymMatrix) -> f64,
            x: &[f64],
            r: f64,
            p: &mut Vec<f64>,
            m: &mut SymMatrix,
            slots: &Slots,
            k: usize,
        ) -> f64 {
            if k == slots.p.len() {
                return rec_x(f, x, r, p, m, slots, 0);
            }
            let (ext, ref c) = slots.p[k];
            let mut acc = ext_init(ext);
            for v in c {
                p[k] = *v;
                acc = extremize(ext, acc, rec_p(f, x, r, p, m, slots, k + 1));
            }
            acc
        }
        rec_p(f, x, r, &mut p, &mut m, slots, 0)
    }

    fn op_value(&self, op: &OperatorSpec, u: &[f64], i: usize, mode: Mode) -> f64 {
        match &op.kind {
            Kind::Leaf(f) => {
                let slots = self.slots(u, i, mode, op.first_order_only());
                self.leaf_value(f.as_ref(), &self.plans[i].x, u[i], &slots)
            }
            Kind::Sup(members) => members
                .iter()
                .map(|m| self.op_value(m, u, i, mode))
                .fold(f64::NEG_INFINITY, |a, b| extremize(Ext::Max, a, b)),
            Kind::Inf(members) => members
                .iter()
                .map(|m| self.op_value(m, u, i, mode))
                .fold(f64::INFINITY, |a, b| extremize(Ext::Min, a, b)),
        }
    }

    fn boundary_value(&self, u: &[f64], i: usize, face: Face, data: &Data) -> f64 {
        let g = &self.grid;
        let u0 = u[i];
        match data {
            Data::Dirichlet(f) => u0 - f,
            Data::Oblique { nu, f } => {
                let dim = g.dim();
                let mut s = 0.0;
                for j in 0..dim {
                    if nu[j] == 0.0 {
                        continue;
                    }
                    let h = g.h()[j];
                    let back = g.shift(i, j, -1).map(|n| (u0 - u[n]) / h);
                    let fwd = g.shift(i, j, 1).map(|n| (u[n] - u0) / h);
                    let pj = if j == face.axis {
                        if face.upper {
                            back
                        } else {
                            fwd
                        }
                    } else if nu[j] > 0.0 {
                        back.or(fwd)
                    } else {
                        fwd.or(back)
                    };
                    s += nu[j] * pj.unwrap_or(0.0);
                }
                s - f
            }
        }
    }

    /// `R(u)` at node `i`.
    pub fn residual_at(&self, u: &[f64], i: usize) -> f64 {
        match &self.plans[i].role {
            Role::Interior => self.op_value(&self.op, u, i, Mode::Interior),
            Role::Strong(face, data) => self.boundary_value(u, i, *face, data),
            Role::Viscosity(face, data) => {
                let b = self.boundary_value(u, i, *face, data);
                match self.params.viscosity_side {
                    ViscositySide::Sub => {
                        let fs = self.op_value(&self.op, u, i, Mode::Sub);
                        extremize(Ext::Min, fs, b)
                    }
                    ViscositySide::Super => {
                        let fp = self.op_value(&self.op, u, i, Mode::Super);
                        extremize(Ext::Max, fp, b)
                    }
                    ViscositySide::Both => {
                        let fs = self.op_value(&self.op, u, i, Mode::Sub);
                        let fp = self.op_value(&self.op, u, i, Mode::Super);
                        extremize(Ext::Max, fp, extremize(Ext::Min, b, fs))
                    }
                }
            }
            Role::StateConstraint => self.op_value(&self.op, u, i, Mode::Super),
        }
    }

    /// `R(u)` at every node.
    pub fn residual_values(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len()).into_par_iter().map(|i| self.residual_at(u, i)).collect()
    }

    pub fn residual(&self, u: &GridFn) -> Result<GridFn> {
        self.check_input(u)?;
        let r = self.residual_values(u.values());
        if let Some(i) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::Evaluation {
                x: self.plans[i].x.clone(),
                r: u.get(i),
                p: Vec::new(),
                value: r[i],
            });
        }
        GridFn::new(self.grid.clone(), r)
    }

    /// `T(u) = u - τ R(u)`.
    pub fn euler(&self, u: &GridFn) -> Result<GridFn> {
        let r = self.residual(u)?;
        let vals = u
            .values()
            .iter()
            .zip(r.values())
            .map(|(a, b)| a - self.tau * b)
            .collect();
        GridFn::new(self.grid.clone(), vals)
    }

    pub(crate) fn euler_values(&self, u: &[f64]) -> Vec<f64> {
        self.step_values(u, self.tau)
    }

    pub(crate) fn step_values(&self, u: &[f64], dt: f64) -> Vec<f64> {
        u.par_iter()
            .enumerate()
            .map(|(i, v)| v - dt * self.residual_at(u, i))
            .collect()
    }

    /// Largest sampled slope of `R_i` in `u_i`; `1 / slope` bounds stable
    /// explicit steps.
    pub fn diagonal_slope_estimate(&self) -> f64 {
        self.slope
    }

    /// The same discretization with another operator of identical structure.
    pub(crate) fn with_operator(&self, op: OperatorSpec) -> SchemeMap {
        SchemeMap { op, ..self.clone() }
    }

    /// Data of a strong Dirichlet node.
    pub(crate) fn strong_dirichlet(&self, i: usize) -> Option<f64> {
        match &self.plans[i].role {
            Role::Strong(_, Data::Dirichlet(f)) => Some(*f),
            _ => None,
        }
    }

    pub(crate) fn check_input(&self, u: &GridFn) -> Result<()> {
        if !u.grid().same_shape(&self.grid) {
            return invalid("grid function lives on a different grid");
        }
        if u.values().iter().any(|v| !v.is_finite()) {
            return invalid("grid function must be finite");
        }
        Ok(())
    }

    /// Checks `u <= v  =>  T(u) <= T(v)` on seeded ordered pairs: `bumps`
    /// single-node increments (checked on the affected nodes) and `dense`
    /// nonnegative increments everywhere. Values are drawn from `[-1, 1]`.
    pub fn check_monotone(&self, bumps: usize, dense: usize, seed: u64) -> Result<MonotoneReport> {
        self.check_step_monotone(self.tau, bumps, dense, seed)
    }

    /// The same check for the map `u - dt R(u)`.
    pub fn check_step_monotone(&self, dt: f64, bumps: usize, dense: usize, seed: u64) -> Result<MonotoneReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.grid.len();
        let mut report = MonotoneReport {
            pairs: 0,
            violations: Vec::new(),
        };
        for _ in 0..bumps {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let j = rng.gen_range(0..n);
            let s = rng.gen_range(0.0..1.0) + f64::EPSILON;
            let mut v = u.clone();
            v[j] += s;
            for i in self.dependents(j) {
                let tu = u[i] - dt * self.residual_at(&u, i);
                let tv = v[i] - dt * self.residual_at(&v, i);
                if tu.is_nan() || tv.is_nan() {
                    return Err(Error::Evaluation {
                        x: self.plans[i].x.clone(),
                        r: u[i],
                        p: Vec::new(),
                        value: f64::NAN,
                    });
                }
                if tu > tv {
                    let gi = self.grid.multi_index(i);
                    let gj = self.grid.multi_index(j);
                    let dir: Vec<isize> = gj.iter().zip(&gi).map(|(a, b)| *a as isize - *b as isize).collect();
                    report.violations.push(Violation {
                        node: i,
                        direction: format!("{dir:?}"),
                        excess: tu - tv,
                    });
                }
            }
            report.pairs += 1;
        }
        for _ in 0..dense {
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = u
                .iter()
                .map(|x| if rng.gen_bool(0.5) { *x } else { x + rng.gen_range(0.0..1.0) })
                .collect();
            let tu = self.step_values(&u, dt);
            let tv = self.step_values(&v, dt);
            for i in 0..n {
                if tu[i].is_nan() || tv[i].is_nan() {
                    return Err(Error::Evaluation {
                        x: self.plans[i].x.clone(),
                        r: u[i],
                        p: Vec::new(),
                        value: f64::NAN,
                    });
                }
                if tu[i] > tv[i] {
                    report.violations.push(Violation {
                        node: i,
                        direction: "dense".into(),
                        excess: tu[i] - tv[i],
                    });
                }
            }
            report.pairs += 1;
        }
        Ok(report)
    }

    /// Largest sampled secant slope of `R_i` in `u_i`.
    fn diagonal_slope(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
        let n = self.grid.len();
        let mut worst = 0.0_f64;
        for s in 0..samples {
            let u: Vec<f64> = if s == 0 {
                vec![0.0; n]
            } else {
                (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
            };
            let slope = (0..n)
                .into_par_iter()
                .map_init(
                    || u.clone(),
                    |w, i| {
                        let base = self.residual_at(&u, i);
                        let mut m = 0.0_f64;
                        for step in [1e-3, -1e-3, 0.5, -0.5] {
                            w[i] = u[i] + step;
                            let d = (self.residual_at(w, i) - base) / step;
                            if d.is_finite() {
                                m = m.max(d);
                            }
                        }
                        w[i] = u[i];
                        m
                    },
                )
                .reduce(|| 0.0, f64::max);
            worst = worst.max(slope);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub node: usize,
    /// Offset of the raised node, or `dense`.
    pub direction: String,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport {
    pub pairs: usize,
    pub violations: Vec<Violation>,
}

impl MonotoneReport {
    pub fn monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Builds the scheme and verifies its monotonicity on seeded ordered pairs.
pub fn discretize(op: &OperatorSpec, grid: Arc<Grid>, bc: &BoundarySpec, params: SchemeParams) -> Result<SchemeMap> {
    let dim = grid.dim();
    if op.dim() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: op.dim(),
        });
    }
    bc.validate(&grid)?;
    if let PRule::Lattice { spacing, growth } = params.p_rule {
        if !(spacing > 0.0) || !(growth >= 0.0) {
            return invalid("lattice spacing must be positive and growth nonnegative");
        }
    }
    if !(params.residual_tol > 0.0) {
        return invalid("residual tolerance must be positive");
    }
    let width = 3usize.pow(dim as u32);
    let mut stencil = Vec::with_capacity(grid.len() * width);
    let mut plans = Vec::with_capacity(grid.len());
    let mut off = vec![0isize; dim];
    for i in 0..grid.len() {
        let multi = grid.multi_index(i);
        for code in 0..width {
            let mut c = code;
            for a in 0..dim {
                let o = (c % 3) as isize - 1;
                c /= 3;
                let pos = multi[a] as isize + o;
                off[a] = if pos < 0 || pos >= grid.n()[a] as isize { -o } else { o };
            }
            stencil.push(grid.offset(i, &off).expect("mirrored offset stays inside"));
        }
        let edges: Vec<Edge> = (0..dim)
            .map(|a| {
                if multi[a] == 0 {
                    Edge::Lower
                } else if multi[a] == grid.n()[a] - 1 {
                    Edge::Upper
                } else {
                    Edge::Inside
                }
            })
            .collect();
        let x = grid.point(i);
        let role = match bc.governing(&grid, i) {
            None => Role::Interior,
            Some((face, fbc)) => {
                let data = match &fbc.condition {
                    FaceCondition::Dirichlet { f } => Some(Data::Dirichlet(f(&x))),
                    FaceCondition::Oblique { nu, f, .. } => Some(Data::Oblique { nu: nu(&x), f: f(&x) }),
                    FaceCondition::StateConstraint => None,
                };
                match (data, fbc.sense) {
                    (None, _) => Role::StateConstraint,
                    (Some(d), Sense::Strong) => Role::Strong(face, d),
                    (Some(d), Sense::Viscosity) => Role::Viscosity(face, d),
                }
            }
        };
        plans.push(NodePlan { x, edges, role });
    }
    let mut scheme = SchemeMap {
        op: op.clone(),
        grid,
        bc: bc.clone(),
        params: params.clone(),
        tau: 1.0,
        slope: 0.0,
        plans: Arc::new(plans),
        stencil: Arc::new(stencil),
        width,
    };
    let zero = vec![0.0; scheme.grid.len()];
    if let Some(i) = scheme.residual_values(&zero).iter().position(|v| v.is_nan()) {
        return Err(Error::Evaluation {
            x: scheme.plans[i].x.clone(),
            r: 0.0,
            p: vec![0.0; dim],
            value: f64::NAN,
        });
    }
    scheme.slope = scheme.diagonal_slope(12, params.seed);
    scheme.tau = match params.tau {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => return invalid(format!("damping {t} must be positive")),
        None if scheme.slope > 0.0 => 0.5 / scheme.slope,
        None => 1.0,
    };
    let report = scheme.check_monotone(params.verify_bumps, params.verify_dense, params.seed)?;
    if let Some(v) = report.violations.first() {
        return Err(Error::NotMonotone {
            node: v.node,
            direction: v.direction.clone(),
            detail: format!(
                "T(u) exceeds T(v) by {:e} for u <= v ({} violations in {} pairs)",
                v.excess,
                report.violations.len(),
                report.pairs
            ),
        });
    }
    Ok(scheme)
}
