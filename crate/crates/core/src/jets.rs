//! Discrete semijet membership tests and sub/supersolution certification.
//!
//! A jet `(p, X)` belongs to the discrete superjet of `u` at a node when the
//! paraboloid `u(x̂) + <p, x - x̂> + ½<X(x - x̂), x - x̂> + slack |x - x̂|²`
//! dominates `u` at every comparison node within `radius`.

use rayon::prelude::*;

use crate::boundary::{BoundarySpec, FaceCondition, Sense};
use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFn};
use crate::jet::Jet;
use crate::matrix::SymMatrix;
use crate::operator::OperatorSpec;

/// Relative rounding allowance of the touching inequalities.
pub const TOUCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Nodes off the box boundary; comparisons use interior nodes only.
    Interior,
    /// All nodes; comparisons use the closed box.
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Sub,
    Super,
    Solution,
}

/// How probe jets are generated at a node.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateRule {
    /// `p` on a lattice of `p_points` values per axis spanning the one-sided
    /// difference quotients; `X` the clipped second-difference Hessian shifted
    /// by `k I` for each `k` in `x_shifts`.
    Stencil { p_points: usize, x_shifts: Vec<f64> },
    /// The same explicit jets at every node.
    Explicit(Vec<Jet>),
}

impl Default for CandidateRule {
    fn default() -> Self {
        CandidateRule::Stencil {
            p_points: 5,
            x_shifts: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JetProbeConfig {
    /// Touching radius in problem units.
    pub radius: f64,
    /// Quadratic remainder margin.
    pub slack: f64,
    /// Tolerance of the operator inequalities.
    pub tol: f64,
    pub region: Region,
    pub candidates: CandidateRule,
}

impl JetProbeConfig {
    /// Radius `2 max h`, slack `max(1e-6, max h)`, tolerance `1e-10`.
    pub fn for_grid(grid: &Grid) -> Self {
        let h = grid.max_h();
        Self {
            radius: 2.0 * h,
            slack: h.max(1e-6),
            tol: 1e-10,
            region: Region::Closed,
            candidates: CandidateRule::default(),
        }
    }

    pub fn new(grid: &Grid, radius: f64, slack: f64) -> Result<Self> {
        if !(radius >= 2.0 * grid.max_h() * (1.0 - 1e-12)) {
            return invalid(format!("radius {radius} is below twice the grid spacing"));
        }
        if !(slack >= 0.0) {
            return invalid("slack must be nonnegative");
        }
        Ok(Self {
            radius,
            slack,
            ..Self::for_grid(grid)
        })
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = region;
        self
    }

    pub fn with_candidates(mut self, rule: CandidateRule) -> Self {
        self.candidates = rule;
        self
    }
}

fn comparison_offsets(grid: &Grid, radius: f64) -> Vec<Vec<isize>> {
    let dim = grid.dim();
    let reach: Vec<isize> = grid
        .h()
        .iter()
        .map(|h| (radius / h * (1.0 + 1e-12)).floor() as isize)
        .collect();
    let mut out = Vec::new();
    let mut cur = vec![0isize; dim];
    fn rec(axis: usize, reach: &[isize], h: &[f64], r2: f64, cur: &mut Vec<isize>, out: &mut Vec<Vec<isize>>) {
        if axis == reach.len() {
            let d2: f64 = cur.iter().zip(h).map(|(k, h)| (*k as f64 * h).powi(2)).sum();
            if d2 > 0.0 && d2 <= r2 * (1.0 + 1e-12) {
                out.push(cur.clone());
            }
            return;
        }
        for k in -reach[axis]..=reach[axis] {
            cur[axis] = k;
            rec(axis + 1, reach, h, r2, cur, out);
        }
    }
    rec(0, &reach, grid.h(), radius * radius, &mut cur, &mut out);
    out
}

fn check_radius(grid: &Grid, cfg: &JetProbeConfig) -> Result<()> {
    if !(cfg.radius >= grid.max_h() * (1.0 - 1e-12)) {
        return invalid(format!(
            "touching radius {} is smaller than one grid cell {}",
            cfg.radius,
            grid.max_h()
        ));
    }
    Ok(())
}

/// Which way the touching inequality points.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Touch {
    Above,
    Below,
}

struct Toucher<'a> {
    grid: &'a Grid,
    values: &'a [f64],
    offsets: &'a [Vec<isize>],
    slack: f64,
    tol: f64,
    region: Region,
}

impl Toucher<'_> {
    /// Mirrored arithmetic: the `Below` test on `u` performs exactly the
    /// negated operations of the `Above` test on `-u`.
    fn touches(&self, node: usize, jet: &Jet, dir: Touch) -> bool {
        let dim = self.grid.dim();
        let xh = self.grid.point(node);
        let u0 = self.values[node];
        let mut x = vec![0.0; dim];
        let mut d = vec![0.0; dim];
        for off in self.offsets {
            let Some(j) = self.grid.offset(node, off) else {
                continue;
            };
            if self.region == Region::Interior && self.grid.is_boundary(j) {
                continue;
            }
            self.grid.point_into(j, &mut x);
            let mut d2 = 0.0;
            let mut lin = 0.0;
            for k in 0..dim {
                d[k] = x[k] - xh[k];
                d2 += d[k] * d[k];
                lin += jet.p[k] * d[k];
            }
            let quad = 0.5 * jet.x.quad_form(&d);
            let base = (u0 + lin) + quad;
            let margin = self.slack * d2;
            let uj = self.values[j];
            let ok = match dir {
                Touch::Above => uj <= (base + margin) + self.tol,
                Touch::Below => uj >= (base - margin) - self.tol,
            };
            if !ok {
                return false;
            }
        }
        true
    }
}

fn touch_test(u: &GridFn, node: usize, jet: &Jet, cfg: &JetProbeConfig, dir: Touch) -> Result<bool> {
    let grid = u.grid();
    check_radius(grid, cfg)?;
    if jet.dim() != grid.dim() {
        return Err(Error::Dimension {
            expected: grid.dim(),
            got: jet.dim(),
        });
    }
    if node >= grid.len() {
        return invalid(format!("node {node} is outside the grid"));
    }
    let offsets = comparison_offsets(grid, cfg.radius);
    let t = Toucher {
        grid,
        values: u.values(),
        offsets: &offsets,
        slack: cfg.slack,
        tol: TOUCH_TOL * (1.0 + u.sup_norm()),
        region: cfg.region,
    };
    Ok(t.touches(node, jet, dir))
}

/// Discrete superjet membership: `u` lies below the paraboloid of `jet`
/// (plus `slack |x - x̂|²`) at every comparison node within `radius`.
pub fn superjet_test(u: &GridFn, node: usize, jet: &Jet, cfg: &JetProbeConfig) -> Result<bool> {
    touch_test(u, node, jet, cfg, Touch::Above)
}

/// Discrete subjet membership, the reversed inequality with `-slack`.
pub fn subjet_test(u: &GridFn, node: usize, jet: &Jet, cfg: &JetProbeConfig) -> Result<bool> {
    touch_test(u, node, jet, cfg, Touch::Below)
}

/// Second-difference Hessian at `node`. Diagonal entries shift to one-sided
/// stencils at the boundary; mixed entries mirror missing neighbours.
pub fn difference_hessian(u: &GridFn, node: usize) -> SymMatrix {
    let g = u.grid();
    let v = u.values();
    let dim = g.dim();
    let at = |off: &[isize]| -> f64 {
        let mut o = off.to_vec();
        for (a, k) in o.iter_mut().enumerate() {
            let pos = g.axis_index(node, a) as isize + *k;
            if pos < 0 || pos >= g.n()[a] as isize {
                *k = -*k;
            }
        }
        v[g.offset(node, &o).expect("mirrored offset is inside")]
    };
    let u0 = v[node];
    SymMatrix::from_upper(dim, |k, l| {
        let mut e = vec![0isize; dim];
        if k == l {
            // one-sided at the boundary so that linear data has zero curvature
            let pos = g.axis_index(node, k) as isize;
            let last = g.n()[k] as isize - 1;
            let shift = if pos == 0 { 1 } else if pos == last { -1 } else { 0 };
            if last < 2 {
                return 0.0;
            }
            let mut val = [0.0; 3];
            for (s, step) in [-1isize, 0, 1].into_iter().enumerate() {
                e[k] = step + shift;
                val[s] = if e[k] == 0 { u0 } else { v[g.offset(node, &e).expect("inside")] };
            }
            ((val[0] + val[2]) - 2.0 * val[1]) / (g.h()[k] * g.h()[k])
        } else {
            let mut val = [0.0; 4];
            for (s, (a, b)) in [(1, 1), (-1, -1), (1, -1), (-1, 1)].into_iter().enumerate() {
                e[k] = a;
                e[l] = b;
                val[s] = at(&e);
            }
            ((val[0] + val[1]) - (val[2] + val[3])) / (4.0 * g.h()[k] * g.h()[l])
        }
    })
}

/// Probe jets at `node` under `rule`.
pub fn probe_jets(u: &GridFn, node: usize, rule: &CandidateRule) -> Vec<Jet> {
    match rule {
        CandidateRule::Explicit(jets) => jets.clone(),
        CandidateRule::Stencil { p_points, x_shifts } => {
            let g = u.grid();
            let v = u.values();
            let dim = g.dim();
            let mut axes: Vec<Vec<f64>> = Vec::with_capacity(dim);
            for k in 0..dim {
                let h = g.h()[k];
                let back = g.shift(node, k, -1).map(|j| (v[node] - v[j]) / h);
                let fwd = g.shift(node, k, 1).map(|j| (v[j] - v[node]) / h);
                let vals = match (back, fwd) {
                    (Some(a), Some(b)) => {
                        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                        if lo == hi || *p_points < 2 {
                            vec![0.5 * (lo + hi)]
                        } else {
                            let m = *p_points - 1;
                            (0..=m)
                                .map(|j| {
                                    if j == 0 {
                                        lo
                                    } else if j == m {
                                        hi
                                    } else if 2 * j == m {
                                        0.5 * (lo + hi)
                                    } else {
                                        lo + (hi - lo) * j as f64 / m as f64
                                    }
                                })
                                .collect()
                        }
                    }
                    (Some(a), None) | (None, Some(a)) => vec![a],
                    (None, None) => vec![0.0],
                };
                axes.push(vals);
            }
            let hess = difference_hessian(u, node);
            let cap = 1.0 / g.max_h().sqrt();
            let clipped = match hess.eigen() {
                Some((vals, vecs)) => {
                    let vals: Vec<f64> = vals.iter().map(|l| l.clamp(-cap, cap)).collect();
                    SymMatrix::from_upper(dim, |i, j| (0..dim).map(|m| vals[m] * vecs[m][i] * vecs[m][j]).sum())
                }
                None => SymMatrix::zeros(dim),
            };
            let xs: Vec<SymMatrix> = x_shifts
                .iter()
                .map(|k| &clipped + &SymMatrix::scalar(dim, *k))
                .collect();
            let mut ps: Vec<Vec<f64>> = vec![Vec::new()];
            for vals in &axes {
                ps = ps
                    .into_iter()
                    .flat_map(|pre| {
                        vals.iter().map(move |v| {
                            let mut q = pre.clone();
                            q.push(*v);
                            q
                        })
                    })
                    .collect();
            }
            let mut out = Vec::with_capacity(ps.len() * xs.len());
            for p in &ps {
                for x in &xs {
                    out.push(Jet {
                        p: p.clone(),
                        x: x.clone(),
                    });
                }
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertFailure {
    pub node: usize,
    /// `Sub` or `Super`: which inequality failed.
    pub side: Side,
    /// The jet with the worst residual at this node.
    pub jet: Jet,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertReport {
    pub verdict: Verdict,
    pub failures: Vec<CertFailure>,
    pub tested_nodes: usize,
    pub jets_per_node: usize,
}

impl CertReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failure_at(&self, node: usize) -> Option<&CertFailure> {
        self.failures.iter().find(|f| f.node == node)
    }
}

/// The quantity whose sign decides one side at one node.
fn side_value(
    op: &OperatorSpec,
    bc: Option<&BoundarySpec>,
    grid: &Grid,
    node: usize,
    x: &[f64],
    r: f64,
    jet: &Jet,
    sub: bool,
) -> Result<Option<f64>> {
    let f = op.try_evaluate(x, r, &jet.p, &jet.x)?;
    let Some((_, face)) = bc.and_then(|b| b.governing(grid, node)) else {
        return Ok(Some(f));
    };
    Ok(match (&face.condition, face.sense) {
        (FaceCondition::StateConstraint, _) => {
            if sub {
                None
            } else {
                Some(f)
            }
        }
        (_, Sense::Strong) => face.evaluate(x, r, &jet.p),
        (_, Sense::Viscosity) => {
            let b = face.evaluate(x, r, &jet.p).expect("data-carrying face");
            Some(if sub { f.min(b) } else { f.max(b) })
        }
    })
}

/// Checks the viscosity inequalities of `op` at every node of `region`
/// against every probe jet that touches `u` from the relevant side.
pub fn certify(
    u: &GridFn,
    op: &OperatorSpec,
    region: Region,
    side: Side,
    bc: Option<&BoundarySpec>,
    cfg: &JetProbeConfig,
) -> Result<CertReport> {
    let grid = u.grid().clone();
    if op.dim() != grid.dim() {
        return Err(Error::Dimension {
            expected: grid.dim(),
            got: op.dim(),
        });
    }
    if u.is_extended() && u.values().iter().any(|v| !v.is_finite()) {
        return invalid("certification needs a finite function");
    }
    if let Some(b) = bc {
        b.validate(&grid)?;
    }
    check_radius(&grid, cfg)?;
    let cfg = JetProbeConfig {
        region,
        ..cfg.clone()
    };
    let offsets = comparison_offsets(&grid, cfg.radius);
    let toucher = Toucher {
        grid: &grid,
        values: u.values(),
        offsets: &offsets,
        slack: cfg.slack,
        tol: TOUCH_TOL * (1.0 + u.sup_norm()),
        region,
    };
    let nodes: Vec<usize> = (0..grid.len())
        .filter(|&i| region == Region::Closed || !grid.is_boundary(i))
        .collect();
    let use_bc = if region == Region::Closed { bc } else { None };
    let tol = cfg.tol;
    let per_node: Vec<Result<(usize, Vec<CertFailure>)>> = nodes
        .par_iter()
        .map(|&node| {
            let jets = probe_jets(u, node, &cfg.candidates);
            if jets.is_empty() {
                return invalid(format!("probe set is empty at node {node}"));
            }
            let x = grid.point(node);
            let r = u.get(node);
            let mut fails = Vec::new();
            if matches!(side, Side::Sub | Side::Solution) {
                let mut worst: Option<(f64, &Jet)> = None;
                for jet in &jets {
                    if !toucher.touches(node, jet, Touch::Above) {
                        continue;
                    }
                    if let Some(v) = side_value(op, use_bc, &grid, node, &x, r, jet, true)? {
                        if v > tol && worst.map_or(true, |(w, _)| v > w) {
                            worst = Some((v, jet));
                        }
                    }
                }
                if let Some((residual, jet)) = worst {
                    fails.push(CertFailure {
                        node,
                        side: Side::Sub,
                        jet: jet.clone(),
                        residual,
                    });
                }
            }
            if matches!(side, Side::Super | Side::Solution) {
                let mut worst: Option<(f64, &Jet)> = None;
                for jet in &jets {
                    if !toucher.touches(node, jet, Touch::Below) {
                        continue;
                    }
                    if let Some(v) = side_value(op, use_bc, &grid, node, &x, r, jet, false)? {
                        if v < -tol && worst.map_or(true, |(w, _)| v < w) {
                            worst = Some((v, jet));
                        }
                    }
                }
                if let Some((residual, jet)) = worst {
                    fails.push(CertFailure {
                        node,
                        side: Side::Super,
                        jet: jet.clone(),
                        residual,
                    });
                }
            }
            Ok((jets.len(), fails))
        })
        .collect();
    let mut failures = Vec::new();
    let mut jets_per_node = 0;
    for item in per_node {
        let (count, fails) = item?;
        jets_per_node = jets_per_node.max(count);
        failures.extend(fails);
    }
    Ok(CertReport {
        verdict: if failures.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        failures,
        tested_nodes: nodes.len(),
        jets_per_node,
    })
}

/// A quadratic `c + <g, x - x0> + ½<Q(x - x0), x - x0>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    pub center: Vec<f64>,
    pub c: f64,
    pub g: Vec<f64>,
    pub q: SymMatrix,
}

impl Quadratic {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let lin: f64 = self.g.iter().zip(&d).map(|(a, b)| a * b).sum();
        self.c + lin + 0.5 * self.q.quad_form(&d)
    }

    /// Recovers the coefficients of `phi` around `center` from unit-step
    /// differences and rejects `phi` if it deviates from the fit at `probes`.
    pub fn fit(phi: &dyn Fn(&[f64]) -> f64, center: &[f64], probes: &[Vec<f64>]) -> Result<Self> {
        let dim = center.len();
        let at = |off: &[(usize, f64)]| {
            let mut x = center.to_vec();
            for &(k, s) in off {
                x[k] += s;
            }
            phi(&x)
        };
        let c = phi(center);
        let g: Vec<f64> = (0..dim).map(|k| 0.5 * (at(&[(k, 1.0)]) - at(&[(k, -1.0)]))).collect();
        let q = SymMatrix::from_upper(dim, |k, l| {
            if k == l {
                (at(&[(k, 1.0)]) + at(&[(k, -1.0)])) - 2.0 * c
            } else {
                0.25 * ((at(&[(k, 1.0), (l, 1.0)]) + at(&[(k, -1.0), (l, -1.0)]))
                    - (at(&[(k, 1.0), (l, -1.0)]) + at(&[(k, -1.0), (l, 1.0)])))
            }
        });
        let fit = Self {
            center: center.to_vec(),
            c,
            g,
            q,
        };
        for x in probes {
            let want = phi(x);
            let got = fit.evaluate(x);
            if !want.is_finite() || (want - got).abs() > 1e-9 * (1.0 + want.abs()) {
                return invalid(format!("test function is not quadratic near {x:?}"));
            }
        }
        Ok(fit)
    }
}

/// Runs `superjet_test(u - φ, x̂, (p - Dφ(x̂), X - D²φ))` for a quadratic `φ`.
pub fn jet_shift_check(
    u: &GridFn,
    phi: &dyn Fn(&[f64]) -> f64,
    node: usize,
    jet: &Jet,
    cfg: &JetProbeConfig,
) -> Result<bool> {
    let grid = u.grid();
    let center = grid.point(node);
    let mut probes: Vec<Vec<f64>> = comparison_offsets(grid, cfg.radius)
        .iter()
        .filter_map(|o| grid.offset(node, o))
        .map(|j| grid.point(j))
        .collect();
    // a few points off the grid so that grid-only agreement is not enough
    for k in 0..grid.dim() {
        let mut x = center.clone();
        x[k] += 0.37;
        probes.push(x.clone());
        x[k] -= 1.1;
        probes.push(x);
    }
    let quad = Quadratic::fit(phi, &center, &probes)?;
    let shifted = GridFn::from_fn(grid.clone(), |x| 0.0 * x[0])?;
    let vals: Vec<f64> = (0..grid.len())
        .map(|j| u.get(j) - phi(&grid.point(j)))
        .collect();
    let shifted = shifted.with_values(vals)?;
    let moved = Jet {
        p: jet.p.iter().zip(&quad.g).map(|(a, b)| a - b).collect(),
        x: &jet.x - &quad.q,
    };
    superjet_test(&shifted, node, &moved, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn line(n: usize, lo: f64, hi: f64) -> Arc<Grid> {
        Arc::new(Grid::cube(1, lo, hi, n).unwrap())
    }

    fn jet1(p: f64, x: f64) -> Jet {
        Jet::new(vec![p], SymMatrix::diag(&[x])).unwrap()
    }

    #[test]
    fn half_parabola_superjet() {
        let g = line(201, -1.0, 1.0);
        let u = GridFn::from_fn(g.clone(), |x| if x[0] <= 0.0 { 0.0 } else { 0.5 * x[0] * x[0] }).unwrap();
        let cfg = JetProbeConfig::new(&g, 0.05, 0.0).unwrap();
        let zero = g.nearest(&[0.0]);
        assert!(superjet_test(&u, zero, &jet1(0.0, 1.0), &cfg).unwrap());
        assert!(!superjet_test(&u, zero, &jet1(0.0, 0.5), &cfg).unwrap());
        let steep = GridFn::from_fn(g.clone(), |x| if x[0] <= 0.0 { 0.0 } else { x[0] + 0.5 * x[0] * x[0] }).unwrap();
        for jet in probe_jets(&steep, zero, &CandidateRule::default()) {
            assert!(!superjet_test(&steep, zero, &jet, &JetProbeConfig::for_grid(&g)).unwrap());
        }
    }

    #[test]
    fn abs_kinks() {
        let g = line(201, -1.0, 1.0);
        let cfg = JetProbeConfig::for_grid(&g);
        let zero = g.nearest(&[0.0]);
        let cone = GridFn::from_fn(g.clone(), |x| -x[0].abs()).unwrap();
        assert!(superjet_test(&cone, zero, &jet1(0.0, 0.0), &cfg).unwrap());
        for jet in probe_jets(&cone, zero, &CandidateRule::default()) {
            assert!(!subjet_test(&cone, zero, &jet, &cfg).unwrap());
        }
        let vee = cone.neg().unwrap();
        assert!(subjet_test(&vee, zero, &jet1(0.0, 0.0), &cfg).unwrap());
        let quad = GridFn::from_fn(g.clone(), |x| 1.5 * x[0] * x[0]).unwrap();
        assert!(subjet_test(&quad, zero, &jet1(0.0, 3.0), &cfg).unwrap());
    }

    #[test]
    fn radius_below_cell_is_error() {
        let g = line(11, 0.0, 1.0);
        let u = GridFn::constant(g.clone(), 0.0).unwrap();
        let mut cfg = JetProbeConfig::for_grid(&g);
        cfg.radius = 0.05;
        assert!(superjet_test(&u, 3, &jet1(0.0, 0.0), &cfg).is_err());
        assert!(JetProbeConfig::new(&g, 0.15, 0.0).is_err());
    }

    #[test]
    fn eikonal_certificates() {
        let g = line(201, -1.0, 1.0);
        let cfg = JetProbeConfig::for_grid(&g);
        let zero = g.nearest(&[0.0]);
        let h = OperatorSpec::new(1, "p2-1", |_, _, p, _| p[0] * p[0] - 1.0).first_order();
        let cone = GridFn::from_fn(g.clone(), |x| -x[0].abs()).unwrap();
        let vee = GridFn::from_fn(g.clone(), |x| x[0].abs()).unwrap();
        assert!(certify(&cone, &h, Region::Interior, Side::Solution, None, &cfg).unwrap().passed());
        assert!(certify(&vee, &h, Region::Interior, Side::Sub, None, &cfg).unwrap().passed());
        let rep = certify(&vee, &h, Region::Interior, Side::Super, None, &cfg).unwrap();
        assert_eq!(rep.failures.len(), 1);
        let f = rep.failure_at(zero).unwrap();
        assert!((f.residual + 1.0).abs() <= 1e-12);
        assert_eq!(f.jet.p, vec![0.0]);
    }

    #[test]
    fn zeroth_order_solution() {
        let g = Arc::new(Grid::cube(2, -1.0, 1.0, 21).unwrap());
        let hfun = |x: &[f64]| x[0].sin() + x[1] * x[1];
        let u = GridFn::from_fn(g.clone(), hfun).unwrap();
        let op = OperatorSpec::new(2, "r-h", move |x, r, _, _| r - hfun(x)).first_order();
        let rep = certify(&u, &op, Region::Closed, Side::Solution, None, &JetProbeConfig::for_grid(&g)).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.tested_nodes, 441);
        assert_eq!(rep.jets_per_node, 125);
    }

    #[test]
    fn shift_by_quadratic() {
        let g = line(101, -1.0, 1.0);
        let cfg = JetProbeConfig::for_grid(&g);
        let zero = g.nearest(&[0.0]);
        let cone = GridFn::from_fn(g.clone(), |x| -x[0].abs()).unwrap();
        let jet = jet1(0.0, 0.0);
        let phi = |x: &[f64]| 0.5 * x[0] * x[0];
        assert!(jet_shift_check(&cone, &phi, zero, &jet, &cfg).unwrap());
        assert!(superjet_test(&cone, zero, &jet, &cfg).unwrap());
        let zero_phi = |_: &[f64]| 0.0;
        assert_eq!(
            jet_shift_check(&cone, &zero_phi, zero, &jet, &cfg).unwrap(),
            superjet_test(&cone, zero, &jet, &cfg).unwrap()
        );
        let cubic = |x: &[f64]| x[0].powi(3);
        assert!(jet_shift_check(&cone, &cubic, zero, &jet, &cfg).is_err());
    }

    #[test]
    fn boundary_sense_dirichlet() {
        // u = 1 - x on [0, 1] solves u' + 1 = 0; at x = 0 the data 0 is missed
        // but the equation holds there, so the viscosity sense passes while
        // the strong sense fails.
        let g = line(51, 0.0, 1.0);
        let u = GridFn::from_fn(g.clone(), |x| 1.0 - x[0]).unwrap();
        let op = OperatorSpec::new(1, "transport", |_, _, p, _| p[0] + 1.0).first_order();
        let cfg = JetProbeConfig::for_grid(&g);
        let visc = BoundarySpec::dirichlet(1, |_| 0.0, Sense::Viscosity);
        let rep = certify(&u, &op, Region::Closed, Side::Solution, Some(&visc), &cfg).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        let strong = BoundarySpec::dirichlet(1, |_| 0.0, Sense::Strong);
        let rep = certify(&u, &op, Region::Closed, Side::Solution, Some(&strong), &cfg).unwrap();
        assert!(!rep.passed());
        assert!(rep.failures.iter().all(|f| f.node == 0));
    }
}
