//! Python bindings. Grid functions cross the boundary as flat lists in
//! node order (last axis fastest).

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::viscosity as core;
use core::analysis::{doubling_chain, doubling_maximize, sup_convolve};
use core::analytic::ClosedForm;
use core::operators::catalog;
use core::parabolic::mcf_evolve;
use core::{BoundarySpec, GridFn, JetProbeConfig, Method, Region, Sampler, SchemeParams, Sense, Side, SymMatrix};

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bad(msg: impl Into<String>) -> PyErr {
    PyValueError::new_err(msg.into())
}

#[pyclass(frozen)]
#[derive(Clone)]
struct Grid {
    inner: Arc<core::Grid>,
}

#[pymethods]
impl Grid {
    #[new]
    fn new(lo: Vec<f64>, hi: Vec<f64>, n: Vec<usize>) -> PyResult<Self> {
        let inner = core::Grid::new(lo, hi, n).map_err(err)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.n().to_vec()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.max_h()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn point(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.len() {
            return Err(bad(format!("node {i} out of range")));
        }
        Ok(self.inner.point(i))
    }

    fn points(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len()).map(|i| self.inner.point(i)).collect()
    }

    fn is_boundary(&self, i: usize) -> bool {
        self.inner.is_boundary(i)
    }

    /// Samples a callable `f(x)` at every node.
    fn sample(&self, py: Python<'_>, f: PyObject) -> PyResult<Vec<f64>> {
        (0..self.inner.len())
            .map(|i| f.call1(py, (self.inner.point(i),))?.extract::<f64>(py))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Grid(lo={:?}, hi={:?}, n={:?})", self.inner.lo(), self.inner.hi(), self.inner.n())
    }
}

impl Grid {
    fn function(&self, values: Vec<f64>) -> PyResult<GridFn> {
        GridFn::new(self.inner.clone(), values).map_err(err)
    }
}

fn call_scalar(f: &PyObject, args: impl IntoPy<Py<pyo3::types::PyTuple>>) -> f64 {
    Python::with_gil(|py| f.call1(py, args).and_then(|v| v.extract::<f64>(py)).unwrap_or(f64::NAN))
}

/// A degenerate elliptic operator `F(x, r, p, X)`.
#[pyclass(frozen)]
#[derive(Clone)]
struct Operator {
    inner: core::OperatorSpec,
}

#[pymethods]
impl Operator {
    /// One of the built-in operators by id.
    #[staticmethod]
    fn catalog(id: &str, dim: usize) -> PyResult<Self> {
        Ok(Self {
            inner: catalog(id, dim).map_err(err)?,
        })
    }

    #[staticmethod]
    fn catalog_ids() -> Vec<&'static str> {
        core::operators::CATALOG_IDS.to_vec()
    }

    /// Wraps `f(x, r, p, X)` where `X` is a nested list. Exceptions and
    /// non-numeric results evaluate to NaN.
    #[staticmethod]
    #[pyo3(signature = (dim, f, name = "python", gamma = None, first_order = false))]
    fn from_callable(dim: usize, f: PyObject, name: &str, gamma: Option<f64>, first_order: bool) -> PyResult<Self> {
        if dim == 0 || dim > 3 {
            return Err(bad("dimension must be 1, 2 or 3"));
        }
        let spec = core::OperatorSpec::new(dim, name, move |x, r, p, m| {
            let rows: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| m.get(i, j)).collect()).collect();
            call_scalar(&f, (x.to_vec(), r, p.to_vec(), rows))
        });
        let spec = if first_order { spec.first_order() } else { spec };
        Ok(Self {
            inner: match gamma {
                Some(g) => spec.with_gamma(g),
                None => spec,
            },
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[pyo3(name = "__call__")]
    fn evaluate(&self, x: Vec<f64>, r: f64, p: Vec<f64>, m: Vec<Vec<f64>>) -> PyResult<f64> {
        let d = self.inner.dim();
        if x.len() != d || p.len() != d || m.len() != d || m.iter().any(|row| row.len() != d) {
            return Err(bad(format!("arguments must have dimension {d}")));
        }
        let m = SymMatrix::from_upper(d, |i, j| 0.5 * (m[i][j] + m[j][i]));
        Ok(self.inner.evaluate(&x, r, &p, &m))
    }

    /// Samples for a violation of properness or ellipticity; returns
    /// `(proper, samples)`.
    #[pyo3(signature = (samples = 2000, seed = 0))]
    fn check_proper(&self, py: Python<'_>, samples: usize, seed: u64) -> PyResult<(bool, usize)> {
        let op = self.inner.clone();
        let rep = py
            .allow_threads(move || core::check_proper(&op, &mut Sampler::new(seed), samples))
            .map_err(err)?;
        Ok((rep.proper, rep.samples))
    }

    fn __repr__(&self) -> String {
        format!("Operator({:?}, dim={})", self.inner.name(), self.inner.dim())
    }
}

fn sense(s: &str) -> PyResult<Sense> {
    match s {
        "strong" => Ok(Sense::Strong),
        "viscosity" => Ok(Sense::Viscosity),
        _ => Err(bad(format!("sense must be 'strong' or 'viscosity', got '{s}'"))),
    }
}

#[pyclass(frozen)]
#[derive(Clone)]
struct Boundary {
    inner: BoundarySpec,
}

#[pymethods]
impl Boundary {
    /// Dirichlet data on every face: a number or a callable `g(x)`.
    #[staticmethod]
    #[pyo3(signature = (dim, data = None, sense = "strong"))]
    fn dirichlet(py: Python<'_>, dim: usize, data: Option<PyObject>, sense: &str) -> PyResult<Self> {
        let s = self::sense(sense)?;
        let inner = match data {
            None => BoundarySpec::dirichlet(dim, |_| 0.0, s),
            Some(d) => match d.extract::<f64>(py) {
                Ok(c) => BoundarySpec::dirichlet(dim, move |_| c, s),
                Err(_) => BoundarySpec::dirichlet(dim, move |x| call_scalar(&d, (x.to_vec(),)), s),
            },
        };
        Ok(Self { inner })
    }

    /// Homogeneous Neumann data on every face.
    #[staticmethod]
    #[pyo3(signature = (dim, sense = "strong"))]
    fn neumann(dim: usize, sense: &str) -> PyResult<Self> {
        Ok(Self {
            inner: BoundarySpec::neumann(dim, self::sense(sense)?),
        })
    }
}

/// Solves `F = 0` with the monotone scheme and returns a dict with keys
/// `u`, `iters`, `residual`, `converged` and `warnings`.
#[pyfunction]
#[pyo3(signature = (op, grid, boundary, init = None, method = "jacobi", residual_tol = None, max_iter = None, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn solve<'py>(
    py: Python<'py>,
    op: &Operator,
    grid: &Grid,
    boundary: &Boundary,
    init: Option<Vec<f64>>,
    method: &str,
    residual_tol: Option<f64>,
    max_iter: Option<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let d = SchemeParams::default();
    let params = SchemeParams {
        method: match method {
            "jacobi" => Method::Jacobi,
            "gauss-seidel" => Method::GaussSeidel,
            "newton" => Method::Newton,
            _ => return Err(bad(format!("unknown method '{method}'"))),
        },
        residual_tol: residual_tol.unwrap_or(d.residual_tol),
        max_iter: max_iter.unwrap_or(d.max_iter),
        seed,
        ..d
    };
    let init = match init {
        Some(v) => grid.function(v)?,
        None => GridFn::constant(grid.inner.clone(), 0.0).map_err(err)?,
    };
    let (op, g, bc) = (op.inner.clone(), grid.inner.clone(), boundary.inner.clone());
    let res = py
        .allow_threads(move || {
            let scheme = core::discretize(&op, g, &bc, params)?;
            core::solve_fixed_point(&scheme, &init)
        })
        .map_err(err)?;
    let out = PyDict::new_bound(py);
    out.set_item("u", res.u.values().to_vec())?;
    out.set_item("iters", res.iters)?;
    out.set_item("residual", res.residual)?;
    out.set_item("converged", res.converged)?;
    out.set_item("warnings", res.warnings)?;
    Ok(out)
}

/// Tests the viscosity inequalities at every node; returns
/// `(passed, failing_nodes)`.
#[pyfunction]
#[pyo3(signature = (op, grid, values, side = "solution", closed = false))]
fn certify(
    py: Python<'_>,
    op: &Operator,
    grid: &Grid,
    values: Vec<f64>,
    side: &str,
    closed: bool,
) -> PyResult<(bool, Vec<usize>)> {
    let side = match side {
        "sub" => Side::Sub,
        "super" => Side::Super,
        "solution" => Side::Solution,
        _ => return Err(bad(format!("side must be 'sub', 'super' or 'solution', got '{side}'"))),
    };
    let region = if closed { Region::Closed } else { Region::Interior };
    let u = grid.function(values)?;
    let op = op.inner.clone();
    let rep = py
        .allow_threads(move || {
            let cfg = JetProbeConfig::for_grid(u.grid());
            core::certify(&u, &op, region, side, None, &cfg)
        })
        .map_err(err)?;
    Ok((rep.passed(), rep.failures.iter().map(|f| f.node).collect()))
}

/// Level-set mean curvature flow. Returns `(t, values, radius)` for the
/// initial state, each snapshot and the final time.
#[pyfunction]
#[pyo3(signature = (grid, psi, t_end, sigma = 0.5, snapshots = Vec::new()))]
fn mean_curvature_flow(
    py: Python<'_>,
    grid: &Grid,
    psi: Vec<f64>,
    t_end: f64,
    sigma: f64,
    snapshots: Vec<f64>,
) -> PyResult<Vec<(f64, Vec<f64>, Option<f64>)>> {
    let psi = grid.function(psi)?;
    let evo = py
        .allow_threads(move || mcf_evolve(&psi, t_end, sigma, &snapshots))
        .map_err(err)?;
    Ok(evo
        .states
        .into_iter()
        .map(|s| (s.t, s.u.values().to_vec(), s.radius))
        .collect())
}

/// Sup-convolution `max_y v(y) - (lambda / 2)|x - y|^2` on the grid.
#[pyfunction]
fn sup_convolution(grid: &Grid, values: Vec<f64>, lam: f64) -> PyResult<Vec<f64>> {
    let v = grid.function(values)?;
    Ok(sup_convolve(&v, lam).map_err(err)?.result.values().to_vec())
}

/// Maximizes `u(x) - v(y) - (alpha / 2)|x - y|^2` per alpha. Returns
/// `(alpha, xhat, yhat, m_alpha)` tuples and whether the chain relations
/// between consecutive alphas hold exactly.
#[pyfunction]
fn doubling(grid: &Grid, u: Vec<f64>, v: Vec<f64>, alphas: Vec<f64>) -> PyResult<(Vec<(f64, usize, usize, f64)>, bool)> {
    let res = doubling_maximize(&grid.function(u)?, &grid.function(v)?, &alphas).map_err(err)?;
    let chain = doubling_chain(&res).iter().all(|c| c.monotone && c.penalty_bound);
    Ok((res.iter().map(|r| (r.alpha, r.xhat, r.yhat, r.m_alpha)).collect(), chain))
}

/// Evaluates a closed-form reference solution at `x`.
#[pyfunction]
#[pyo3(signature = (id, x, eps = None))]
fn closed_form(id: &str, x: Vec<f64>, eps: Option<f64>) -> PyResult<f64> {
    let f = ClosedForm::by_id(id, eps).map_err(err)?;
    if x.len() != f.dim {
        return Err(bad(format!("'{id}' takes {} coordinates", f.dim)));
    }
    Ok(f.evaluate(&x))
}

#[pymodule]
#[pyo3(name = "viscosity")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Grid>()?;
    m.add_class::<Operator>()?;
    m.add_class::<Boundary>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(mean_curvature_flow, m)?)?;
    m.add_function(wrap_pyfunction!(sup_convolution, m)?)?;
    m.add_function(wrap_pyfunction!(doubling, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    Ok(())
}
