//! JSON problem configuration.

use std::collections::BTreeMap;

use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub operator: Option<OperatorCfg>,
    pub grid: GridCfg,
    pub boundary: Option<BoundaryCfg>,
    #[serde(default)]
    pub scheme: SchemeCfg,
    /// Initial guess for `solve`; defaults to zero.
    pub initial: Option<String>,
    pub seed: Option<u64>,
    pub certify: Option<CertifyCfg>,
    pub flow: Option<FlowCfg>,
    pub doubling: Option<DoublingCfg>,
    pub supconv: Option<SupconvCfg>,
    pub convergence: Option<ConvergenceCfg>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorCfg {
    /// A reference operator by id.
    Catalog { id: String },
    /// `F` as an expression in `x, y, z, t, r, p1.., X11..`.
    Expr {
        expr: String,
        #[serde(default)]
        first_order: bool,
        gamma: Option<f64>,
    },
    /// `-trace(a D²u) + <b, Du> + c u - f` with coefficient expressions in `x, y, z`.
    Linear {
        a: Vec<Vec<String>>,
        b: Vec<String>,
        c: String,
        f: String,
    },
    /// The level-set mean curvature operator (flows only).
    MeanCurvature,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SenseCfg {
    #[default]
    Strong,
    Viscosity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FaceCfg {
    Dirichlet {
        #[serde(default = "zero")]
        data: String,
        #[serde(default)]
        sense: SenseCfg,
    },
    /// `<n, Du> = data` with `n` the outward normal.
    Neumann {
        #[serde(default = "zero")]
        data: String,
        #[serde(default)]
        sense: SenseCfg,
    },
    StateConstraint,
}

fn zero() -> String {
    "0".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryCfg {
    /// Condition on every face not listed in `faces`.
    pub default: FaceCfg,
    /// Keys `x-`, `x+`, `y-`, `y+`, `z-`, `z+`.
    #[serde(default)]
    pub faces: BTreeMap<String, FaceCfg>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MethodCfg {
    Jacobi,
    GaussSeidel,
    Newton,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SideCfg {
    Sub,
    Super,
    Both,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeCfg {
    pub method: Option<MethodCfg>,
    pub max_iter: Option<usize>,
    pub residual_tol: Option<f64>,
    pub tau: Option<f64>,
    pub viscosity_side: Option<SideCfg>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum CertSide {
    Sub,
    Super,
    Solution,
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum RegionCfg {
    #[default]
    Interior,
    Closed,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyCfg {
    /// The candidate function of `x, y, z`.
    pub function: String,
    pub side: CertSide,
    #[serde(default)]
    pub region: RegionCfg,
    pub radius: Option<f64>,
    pub slack: Option<f64>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DtCfg {
    Cfl(f64),
    Fixed(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowCfg {
    pub initial: String,
    pub t_end: f64,
    pub dt: DtCfg,
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoublingCfg {
    pub u: String,
    pub v: String,
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ConvKind {
    #[default]
    Sup,
    Inf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupconvCfg {
    /// Function of `x, y, z`; when absent a seeded piecewise-linear function
    /// with `pieces` segments is used (one-dimensional grids only).
    pub v: Option<String>,
    pub pieces: Option<usize>,
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub kind: ConvKind,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceCfg {
    /// A closed-form id such as `neumann-exact` or `eikonal-plus-u`.
    pub oracle: String,
    pub eps: Option<f64>,
    pub refinements: usize,
}

pub fn parse(text: &str) -> Result<Config, String> {
    serde_json::from_str(text).map_err(|e| format!("config error: {e}"))
}
