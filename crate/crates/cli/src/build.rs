//! Turns a parsed config into library objects.

use std::sync::Arc;

use viscosity::operators::{catalog, make_linear, LinearCoefficients, CATALOG_IDS};
use viscosity::parabolic::FlowOperator;
use viscosity::solve::ViscositySide;
use viscosity::{BoundarySpec, Face, FaceBc, Grid, GridFn, Method, OperatorSpec, SchemeParams, Sense, SymMatrix};

use crate::config::{Config, FaceCfg, MethodCfg, OperatorCfg, SenseCfg, SideCfg};
use crate::expr::Compiled;

/// Variables of space-time expressions, in slot order.
const SPACE_VARS: [&str; 4] = ["x", "y", "z", "t"];

/// Variables of operator expressions. `p` and `X` alias `p1` and `X11`.
const OP_VARS: [&str; 16] = [
    "x", "y", "z", "t", "r", "p1", "p2", "p3", "X11", "X12", "X13", "X22", "X23", "X33", "p", "X",
];

pub type Field = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A function of the coordinates (and optionally `t`).
pub fn space_fn(src: &str, what: &str) -> Result<Field, String> {
    let c = Compiled::new(src, &SPACE_VARS).map_err(|e| format!("{what}: {e}"))?;
    Ok(Arc::new(move |x: &[f64]| {
        let mut a = [0.0; 4];
        a[..x.len().min(3)].copy_from_slice(&x[..x.len().min(3)]);
        c.eval(&a)
    }))
}

pub fn grid(cfg: &Config) -> Result<Arc<Grid>, String> {
    let g = &cfg.grid;
    if g.lo.is_empty() || g.lo.len() > 3 {
        return Err("grid: dimension must be 1, 2 or 3".into());
    }
    Grid::new(g.lo.clone(), g.hi.clone(), g.n.clone())
        .map(Arc::new)
        .map_err(|e| format!("grid: {e}"))
}

fn op_args(t: f64, x: &[f64], r: f64, p: &[f64], m: &SymMatrix) -> [f64; 16] {
    let mut a = [0.0; 16];
    let d = x.len();
    a[..d].copy_from_slice(x);
    a[3] = t;
    a[4] = r;
    a[5..5 + d].copy_from_slice(&p[..d]);
    let slot = |i: usize, j: usize| match (i, j) {
        (0, 0) => 8,
        (0, 1) => 9,
        (0, 2) => 10,
        (1, 1) => 11,
        (1, 2) => 12,
        _ => 13,
    };
    for i in 0..d {
        for j in i..d {
            a[slot(i, j)] = m.get(i, j);
        }
    }
    a[14] = a[5];
    a[15] = a[8];
    a
}

fn compile_op(src: &str) -> Result<Compiled, String> {
    Compiled::new(src, &OP_VARS).map_err(|e| format!("operator: {e}"))
}

pub fn operator(cfg: &Config, dim: usize) -> Result<OperatorSpec, String> {
    let Some(op) = &cfg.operator else {
        return Err("config has no 'operator' section".into());
    };
    match op {
        OperatorCfg::Catalog { id } => {
            if !CATALOG_IDS.contains(&id.as_str()) {
                return Err(format!("operator: unknown id '{id}' (known: {})", CATALOG_IDS.join(", ")));
            }
            catalog(id, dim).map_err(|e| format!("operator: {e}"))
        }
        OperatorCfg::Expr {
            expr,
            first_order,
            gamma,
        } => {
            let c = compile_op(expr)?;
            let spec = OperatorSpec::new(dim, expr.clone(), move |x, r, p, m| c.eval(&op_args(0.0, x, r, p, m)));
            let spec = if *first_order { spec.first_order() } else { spec };
            Ok(match gamma {
                Some(g) => spec.with_gamma(*g),
                None => spec,
            })
        }
        OperatorCfg::Linear { a, b, c, f } => {
            if a.len() != dim || a.iter().any(|row| row.len() != dim) || b.len() != dim {
                return Err(format!("operator: linear coefficients must match dimension {dim}"));
            }
            let a_fns = a
                .iter()
                .map(|row| row.iter().map(|s| space_fn(s, "operator.a")).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            let b_fns = b.iter().map(|s| space_fn(s, "operator.b")).collect::<Result<Vec<_>, _>>()?;
            let c_fn = space_fn(c, "operator.c")?;
            let f_fn = space_fn(f, "operator.f")?;
            let g = &cfg.grid;
            make_linear(LinearCoefficients {
                dim,
                a: Arc::new(move |x: &[f64]| SymMatrix::from_upper(dim, |i, j| a_fns[i][j](x))),
                sigma: None,
                b: Arc::new(move |x: &[f64]| b_fns.iter().map(|f| f(x)).collect()),
                c: c_fn,
                f: f_fn,
                domain: (g.lo.clone(), g.hi.clone()),
            })
            .map_err(|e| format!("operator: {e}"))
        }
        OperatorCfg::MeanCurvature => Err("operator: mean-curvature is available for 'flow' only".into()),
    }
}

pub fn flow_operator(cfg: &Config, dim: usize) -> Result<FlowOperator, String> {
    match &cfg.operator {
        Some(OperatorCfg::MeanCurvature) => Ok(FlowOperator::MeanCurvature { dim }),
        Some(OperatorCfg::Expr {
            expr, first_order, ..
        }) if compile_op(expr)?.uses(3) => {
            let c = compile_op(expr)?;
            Ok(FlowOperator::TimeDependent {
                dim,
                name: expr.clone(),
                first_order: *first_order,
                f: Arc::new(move |t, x, r, p, m| c.eval(&op_args(t, x, r, p, m))),
            })
        }
        _ => operator(cfg, dim).map(FlowOperator::Stationary),
    }
}

fn sense(s: SenseCfg) -> Sense {
    match s {
        SenseCfg::Strong => Sense::Strong,
        SenseCfg::Viscosity => Sense::Viscosity,
    }
}

fn face_bc(cfg: &FaceCfg, face: Face, dim: usize) -> Result<FaceBc, String> {
    Ok(match cfg {
        FaceCfg::Dirichlet { data, sense: s } => {
            let f = space_fn(data, "boundary data")?;
            FaceBc::dirichlet(move |x| f(x), sense(*s))
        }
        FaceCfg::Neumann { data, sense: s } => {
            let f = space_fn(data, "boundary data")?;
            FaceBc::neumann(face, dim, move |x| f(x), sense(*s))
        }
        FaceCfg::StateConstraint => FaceBc::state_constraint(),
    })
}

fn parse_face(key: &str, dim: usize) -> Result<Face, String> {
    let axis = match key.chars().next() {
        Some('x') => 0,
        Some('y') => 1,
        Some('z') => 2,
        _ => return Err(format!("boundary: unknown face '{key}'")),
    };
    let upper = match &key[1..] {
        "+" => true,
        "-" => false,
        _ => return Err(format!("boundary: unknown face '{key}' (use x-, x+, y-, ...)")),
    };
    if axis >= dim {
        return Err(format!("boundary: face '{key}' does not exist in dimension {dim}"));
    }
    Ok(Face { axis, upper })
}

/// The configured boundary, or homogeneous strong Dirichlet data.
pub fn boundary(cfg: &Config, dim: usize) -> Result<BoundarySpec, String> {
    let Some(b) = &cfg.boundary else {
        return Ok(BoundarySpec::dirichlet(dim, |_| 0.0, Sense::Strong));
    };
    let mut faces = Vec::new();
    for axis in 0..dim {
        for upper in [false, true] {
            let face = Face { axis, upper };
            faces.push((face, face_bc(&b.default, face, dim)?));
        }
    }
    let mut spec = BoundarySpec::uniform(dim, faces[0].1.clone());
    for (face, bc) in faces {
        spec = spec.with_face(face, bc);
    }
    for (key, fc) in &b.faces {
        let face = parse_face(key, dim)?;
        spec = spec.with_face(face, face_bc(fc, face, dim)?);
    }
    Ok(spec)
}

pub fn scheme_params(cfg: &Config, seed: u64) -> SchemeParams {
    let s = &cfg.scheme;
    let d = SchemeParams::default();
    SchemeParams {
        tau: s.tau.or(d.tau),
        max_iter: s.max_iter.unwrap_or(d.max_iter),
        residual_tol: s.residual_tol.unwrap_or(d.residual_tol),
        method: match s.method {
            Some(MethodCfg::Jacobi) => Method::Jacobi,
            Some(MethodCfg::GaussSeidel) => Method::GaussSeidel,
            Some(MethodCfg::Newton) => Method::Newton,
            None => d.method,
        },
        viscosity_side: match s.viscosity_side {
            Some(SideCfg::Sub) => ViscositySide::Sub,
            Some(SideCfg::Super) => ViscositySide::Super,
            Some(SideCfg::Both) => ViscositySide::Both,
            None => d.viscosity_side,
        },
        seed,
        ..d
    }
}

pub fn sample(grid: &Arc<Grid>, src: &str, what: &str) -> Result<GridFn, String> {
    let f = space_fn(src, what)?;
    GridFn::from_fn(grid.clone(), |x| f(x)).map_err(|e| format!("{what}: {e}"))
}
