use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use viscosity::analysis::{
    doubling_chain, doubling_maximize, inf_convolve, magic_identity_check, seeded_piecewise_linear, sup_convolve,
    SupConvolution,
};
use viscosity::analytic::ClosedForm;
use viscosity::parabolic::{DtPolicy, Flow, TimeGrid};
use viscosity::{certify, discretize, solve_fixed_point, Grid, GridFn, JetProbeConfig, Region, Side};

use crate::build;
use crate::config::{CertSide, Config, ConvKind, DtCfg, RegionCfg};
use crate::output::{coord_names, grid_fn_csv, out_path, write_json, Csv};

/// A failed command with its exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    NoConvergence(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::NoConvergence(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::NoConvergence(m) => m,
        }
    }
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Config(s)
    }
}

impl From<viscosity::Error> for Failure {
    fn from(e: viscosity::Error) -> Self {
        match e {
            viscosity::Error::Cfl { .. } | viscosity::Error::Divergence { .. } => Failure::NoConvergence(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

pub type Outcome = Result<i32, Failure>;

pub struct Ctx<'a> {
    pub cfg: &'a Config,
    pub out: &'a Path,
    pub seed: u64,
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, Failure> {
    s.as_ref().ok_or_else(|| Failure::Config(format!("config has no '{name}' section")))
}

#[derive(Serialize)]
struct SolveSummary {
    converged: bool,
    residual: f64,
    iters: usize,
    min: f64,
    max: f64,
    contraction: Option<f64>,
    warnings: Vec<String>,
}

fn run_solve(cfg: &Config, grid: Arc<Grid>, seed: u64) -> Result<viscosity::SolveResult, Failure> {
    let dim = grid.dim();
    let op = build::operator(cfg, dim)?;
    let bc = build::boundary(cfg, dim)?;
    let scheme = discretize(&op, grid.clone(), &bc, build::scheme_params(cfg, seed))?;
    let init = match &cfg.initial {
        Some(src) => build::sample(&grid, src, "initial")?,
        None => GridFn::constant(grid, 0.0)?,
    };
    Ok(solve_fixed_point(&scheme, &init)?)
}

pub fn solve(ctx: &Ctx) -> Outcome {
    let grid = build::grid(ctx.cfg)?;
    let res = run_solve(ctx.cfg, grid, ctx.seed)?;
    grid_fn_csv(&res.u, "u").write(&out_path(ctx.out, "solution.csv"))?;
    let mut log = Csv::new(&["iter", "residual_sup", "min_u", "max_u"]);
    for row in &res.trace {
        log.row_with(&[row.iter.to_string()], &[row.residual_sup, row.min_u, row.max_u]);
    }
    log.write(&out_path(ctx.out, "iterations.csv"))?;
    let summary = SolveSummary {
        converged: res.converged,
        residual: res.residual,
        iters: res.iters,
        min: res.u.min(),
        max: res.u.max(),
        contraction: res.contraction,
        warnings: res.warnings.clone(),
    };
    write_json(&out_path(ctx.out, "summary.json"), &summary)?;
    if res.converged {
        Ok(0)
    } else {
        Err(Failure::NoConvergence(format!(
            "no convergence after {} iterations (residual {:e})",
            res.iters, res.residual
        )))
    }
}

#[derive(Serialize)]
struct CertSummary {
    passed: bool,
    tested_nodes: usize,
    jets_per_node: usize,
    failures: usize,
}

pub fn certify_cmd(ctx: &Ctx) -> Outcome {
    let c = section(&ctx.cfg.certify, "certify")?;
    let grid = build::grid(ctx.cfg)?;
    let dim = grid.dim();
    let op = build::operator(ctx.cfg, dim)?;
    let u = build::sample(&grid, &c.function, "certify.function")?;
    let region = match c.region {
        RegionCfg::Interior => Region::Interior,
        RegionCfg::Closed => Region::Closed,
    };
    let side = match c.side {
        CertSide::Sub => Side::Sub,
        CertSide::Super => Side::Super,
        CertSide::Solution => Side::Solution,
    };
    let mut probe = JetProbeConfig::for_grid(&grid);
    if c.radius.is_some() || c.slack.is_some() {
        probe = JetProbeConfig::new(&grid, c.radius.unwrap_or(probe.radius), c.slack.unwrap_or(probe.slack))?;
    }
    if let Some(t) = c.tol {
        probe = probe.with_tol(t);
    }
    let bc = match (&ctx.cfg.boundary, region) {
        (Some(_), Region::Closed) => Some(build::boundary(ctx.cfg, dim)?),
        _ => None,
    };
    let rep = certify(&u, &op, region, side, bc.as_ref(), &probe)?;
    let mut header = vec!["node"];
    header.extend(coord_names(dim));
    header.push("side");
    let pnames: Vec<String> = (1..=dim).map(|k| format!("p{k}")).collect();
    header.extend(pnames.iter().map(|s| s.as_str()));
    header.push("residual");
    let mut csv = Csv::new(&header);
    for f in &rep.failures {
        let x = grid.point(f.node);
        let side = if f.side == Side::Sub { "sub" } else { "super" };
        let lead = vec![f.node.to_string()];
        let mut cells = x;
        let mut lead = lead;
        lead.extend(cells.drain(..).map(|v| crate::output::num(v)));
        lead.push(side.to_string());
        let mut vals = f.jet.p.clone();
        vals.push(f.residual);
        csv.row_with(&lead, &vals);
    }
    csv.write(&out_path(ctx.out, "failures.csv"))?;
    write_json(
        &out_path(ctx.out, "summary.json"),
        &CertSummary {
            passed: rep.passed(),
            tested_nodes: rep.tested_nodes,
            jets_per_node: rep.jets_per_node,
            failures: rep.failures.len(),
        },
    )?;
    Ok(if rep.passed() { 0 } else { 3 })
}

#[derive(Serialize)]
struct StateSummary {
    t: f64,
    min: f64,
    max: f64,
    radius: Option<f64>,
}

#[derive(Serialize)]
struct FlowSummary {
    steps: usize,
    dt: f64,
    extinction: Option<f64>,
    states: Vec<StateSummary>,
}

pub fn flow(ctx: &Ctx) -> Outcome {
    let c = section(&ctx.cfg.flow, "flow")?;
    let grid = build::grid(ctx.cfg)?;
    let dim = grid.dim();
    let op = build::flow_operator(ctx.cfg, dim)?;
    let bc = match &ctx.cfg.boundary {
        Some(_) => Some(build::boundary(ctx.cfg, dim)?),
        None => None,
    };
    let flow = Flow::new(op, grid.clone(), bc.as_ref(), ctx.seed)?;
    let psi = build::sample(&grid, &c.initial, "flow.initial")?;
    let policy = match c.dt {
        DtCfg::Cfl(sigma) => DtPolicy::Cfl { sigma },
        DtCfg::Fixed(dt) => DtPolicy::Fixed(dt),
    };
    let evo = flow.evolve(
        &psi,
        &TimeGrid {
            t_end: c.t_end,
            policy,
        },
        &c.snapshots,
    )?;
    let mut table = Csv::new(&["t", "min_u", "max_u", "fitted_radius"]);
    let mut states = Vec::new();
    for (k, s) in evo.states.iter().enumerate() {
        grid_fn_csv(&s.u, "u").write(&out_path(ctx.out, &format!("snapshot_{k:03}.csv")))?;
        table.row(&[s.t, s.u.min(), s.u.max(), s.radius.unwrap_or(f64::NAN)]);
        states.push(StateSummary {
            t: s.t,
            min: s.u.min(),
            max: s.u.max(),
            radius: s.radius,
        });
    }
    table.write(&out_path(ctx.out, "summary.csv"))?;
    write_json(
        &out_path(ctx.out, "summary.json"),
        &FlowSummary {
            steps: evo.steps,
            dt: evo.dt,
            extinction: evo.extinction,
            states,
        },
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct ChainSummary {
    alpha: f64,
    monotone: bool,
    penalty_bound: bool,
    full_bound: bool,
}

pub fn doubling(ctx: &Ctx) -> Outcome {
    let c = section(&ctx.cfg.doubling, "doubling")?;
    let grid = build::grid(ctx.cfg)?;
    let u = build::sample(&grid, &c.u, "doubling.u")?;
    let v = build::sample(&grid, &c.v, "doubling.v")?;
    let res = doubling_maximize(&u, &v, &c.alphas)?;
    let dim = grid.dim();
    let mut header = vec!["alpha".to_string()];
    header.extend(coord_names(dim).iter().map(|n| format!("xhat_{n}")));
    header.extend(coord_names(dim).iter().map(|n| format!("yhat_{n}")));
    header.extend(["m_alpha", "penalty", "alpha_dist_sq"].map(String::from));
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut csv = Csv::new(&header);
    for r in &res {
        let mut row = vec![r.alpha];
        row.extend(grid.point(r.xhat));
        row.extend(grid.point(r.yhat));
        row.extend([r.m_alpha, r.penalty, r.alpha * grid.node_distance_sq(r.xhat, r.yhat)]);
        csv.row(&row);
    }
    csv.write(&out_path(ctx.out, "doubling.csv"))?;
    let chain: Vec<ChainSummary> = doubling_chain(&res)
        .into_iter()
        .map(|c| ChainSummary {
            alpha: c.alpha,
            monotone: c.monotone,
            penalty_bound: c.penalty_bound,
            full_bound: c.full_bound,
        })
        .collect();
    write_json(&out_path(ctx.out, "summary.json"), &chain)?;
    Ok(0)
}

#[derive(Serialize)]
struct ConvSummary {
    lambda: f64,
    dominates_source: bool,
    midpoint_convex: bool,
    unique_nodes: usize,
    max_identity_residual: Option<f64>,
    jet_membership: Option<f64>,
}

fn identity_stats(sc: &SupConvolution) -> Result<(usize, f64, f64), Failure> {
    let g = sc.result.grid();
    let (mut unique, mut member, mut worst) = (0usize, 0usize, 0.0f64);
    for eta in 0..g.len() {
        if g.is_boundary(eta) || sc.maximizers[eta].len() != 1 {
            continue;
        }
        let rep = magic_identity_check(sc, eta)?;
        unique += 1;
        worst = worst.max(rep.identity_residual);
        member += rep.jet_membership as usize;
    }
    Ok((unique, worst, member as f64 / unique.max(1) as f64))
}

pub fn supconv(ctx: &Ctx) -> Outcome {
    let c = section(&ctx.cfg.supconv, "supconv")?;
    let grid = build::grid(ctx.cfg)?;
    let v = match &c.v {
        Some(src) => build::sample(&grid, src, "supconv.v")?,
        None => seeded_piecewise_linear(grid.clone(), ctx.seed, c.pieces.unwrap_or(8))?,
    };
    let mut summary = Vec::new();
    for (k, &lambda) in c.lambda.iter().enumerate() {
        let sc = match c.kind {
            ConvKind::Sup => sup_convolve(&v, lambda)?,
            ConvKind::Inf => inf_convolve(&v, lambda)?,
        };
        let mut header = coord_names(grid.dim());
        header.extend(["v", "result", "argmax_count"]);
        let mut csv = Csv::new(&header);
        for i in 0..grid.len() {
            let mut row = grid.point(i);
            row.extend([v.get(i), sc.result.get(i), sc.maximizers[i].len() as f64]);
            csv.row(&row);
        }
        csv.write(&out_path(ctx.out, &format!("convolution_{k:02}.csv")))?;
        let (unique, worst, frac) = match c.kind {
            ConvKind::Sup => {
                let (u, w, f) = identity_stats(&sc)?;
                (u, Some(w), Some(f))
            }
            ConvKind::Inf => (0, None, None),
        };
        summary.push(ConvSummary {
            lambda,
            dominates_source: sc.dominates_source(),
            midpoint_convex: sc.midpoint_convex(),
            unique_nodes: unique,
            max_identity_residual: worst,
            jet_membership: frac,
        });
    }
    write_json(&out_path(ctx.out, "summary.json"), &summary)?;
    Ok(0)
}

#[derive(Serialize)]
struct Level {
    n: usize,
    h: f64,
    error: f64,
    iters: usize,
    converged: bool,
}

#[derive(Serialize)]
struct ConvergenceSummary {
    oracle: String,
    levels: Vec<Level>,
    monotone: bool,
}

pub fn convergence(ctx: &Ctx) -> Outcome {
    let c = section(&ctx.cfg.convergence, "convergence")?;
    let oracle = ClosedForm::by_id(&c.oracle, c.eps)?;
    let base = build::grid(ctx.cfg)?;
    if oracle.dim != base.dim() {
        return Err(Failure::Config(format!(
            "oracle '{}' is {}-dimensional but the grid is {}-dimensional",
            c.oracle,
            oracle.dim,
            base.dim()
        )));
    }
    let mut levels = Vec::new();
    let mut csv = Csv::new(&["n", "h", "error", "ratio"]);
    for j in 0..=c.refinements {
        let n: Vec<usize> = base.n().iter().map(|m| (m - 1) * (1 << j) + 1).collect();
        let grid = Arc::new(Grid::new(base.lo().to_vec(), base.hi().to_vec(), n.clone())?);
        let res = run_solve(ctx.cfg, grid.clone(), ctx.seed)?;
        let error = (0..grid.len())
            .map(|i| (res.u.get(i) - oracle.evaluate(&grid.point(i))).abs())
            .fold(0.0, f64::max);
        let ratio = levels.last().map_or(f64::NAN, |l: &Level| l.error / error);
        csv.row_with(&[n[0].to_string()], &[grid.max_h(), error, ratio]);
        levels.push(Level {
            n: n[0],
            h: grid.max_h(),
            error,
            iters: res.iters,
            converged: res.converged,
        });
    }
    csv.write(&out_path(ctx.out, "convergence.csv"))?;
    let monotone = levels.windows(2).all(|w| w[1].error < w[0].error);
    if !monotone {
        eprintln!("note: errors are not monotonically decreasing");
    }
    let all = levels.iter().all(|l| l.converged);
    write_json(
        &out_path(ctx.out, "summary.json"),
        &ConvergenceSummary {
            oracle: c.oracle.clone(),
            levels,
            monotone,
        },
    )?;
    if all {
        Ok(0)
    } else {
        Err(Failure::NoConvergence("a refinement level did not converge".into()))
    }
}
