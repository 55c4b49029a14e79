//! Catalog of proper operators: linear, Bellman/Isaacs families, obstacle
//! wrappers, eigenvalue functions, quasilinear examples and mean curvature.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::matrix::SymMatrix;
use crate::operator::{Kind, Modulus, OperatorSpec};
use crate::proper::Sampler;

pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatrixField = Arc<dyn Fn(&[f64]) -> SymMatrix + Send + Sync>;
/// Row-major `N x N` matrix field (not necessarily symmetric).
pub type SquareField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Coefficients of `-trace(A(x) X) + <b(x), p> + c(x) r - f(x)`.
#[derive(Clone)]
pub struct LinearCoefficients {
    pub dim: usize,
    pub a: MatrixField,
    /// Optional factor `Σ` with `A = Σᵀ Σ` and its Lipschitz constant.
    pub sigma: Option<(SquareField, f64)>,
    pub b: VectorField,
    pub c: ScalarField,
    pub f: ScalarField,
    /// Box on which the coefficients are sampled and the operator is used.
    pub domain: (Vec<f64>, Vec<f64>),
}

impl LinearCoefficients {
    /// `A = I`, `b = 0`, `c = c0`, `f = 0` on `[-1, 1]^dim`.
    pub fn laplacian(dim: usize, c0: f64) -> Self {
        Self {
            dim,
            a: Arc::new(move |_| SymMatrix::identity(dim)),
            sigma: None,
            b: Arc::new(move |_| vec![0.0; dim]),
            c: Arc::new(move |_| c0),
            f: Arc::new(|_| 0.0),
            domain: (vec![-1.0; dim], vec![1.0; dim]),
        }
    }
}

/// Number of coefficient samples drawn by constructors.
const COEFF_SAMPLES: usize = 512;

fn coefficient_points(dim: usize, domain: &(Vec<f64>, Vec<f64>), seed: u64) -> Vec<Vec<f64>> {
    let mut s = Sampler::new(seed);
    let mut pts: Vec<Vec<f64>> = (0..COEFF_SAMPLES).map(|_| s.point_in(&domain.0, &domain.1)).collect();
    // Corners catch extremes of coefficients that are monotone along axes.
    if dim <= 4 {
        for mask in 0..(1usize << dim) {
            pts.push(
                (0..dim)
                    .map(|i| if mask >> i & 1 == 1 { domain.1[i] } else { domain.0[i] })
                    .collect(),
            );
        }
    }
    pts
}

/// Builds the linear operator; rejects coefficient fields whose diffusion is
/// not positive semidefinite at a sample.
pub fn make_linear(coef: LinearCoefficients) -> Result<OperatorSpec> {
    let dim = coef.dim;
    let mut gamma = f64::INFINITY;
    for x in coefficient_points(dim, &coef.domain, 0x11ea) {
        let a = (coef.a)(&x);
        if a.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: a.dim(),
            });
        }
        if !a.is_finite() || !(coef.c)(&x).is_finite() || !(coef.f)(&x).is_finite() {
            return invalid(format!("coefficients are not finite at {x:?}"));
        }
        let min_eig = a.min_eigenvalue();
        if min_eig < -1e-10 {
            return Err(Error::NotPsd { x, min_eig });
        }
        if let Some((sigma, _)) = &coef.sigma {
            let s = sigma(&x);
            let sts = SymMatrix::from_upper(dim, |i, j| (0..dim).map(|k| s[k * dim + i] * s[k * dim + j]).sum());
            if (&sts - &a).norm() > 1e-10 {
                return invalid(format!("Σᵀ Σ differs from A at {x:?}"));
            }
        }
        gamma = gamma.min((coef.c)(&x));
    }
    let LinearCoefficients {
        a,
        sigma,
        b,
        c,
        f,
        domain,
        ..
    } = coef;
    let mut op = OperatorSpec::new(dim, "linear", move |x, r, p, m| {
        let drift = b(x);
        let mut first = 0.0;
        for i in 0..p.len() {
            first += drift[i] * p[i];
        }
        -a(x).frobenius_dot(m) + first + c(x) * r - f(x)
    })
    .with_domain(domain.0, domain.1)?;
    if gamma >= 0.0 {
        op = op.with_gamma(gamma);
    }
    if let Some((_, lip)) = sigma {
        op = op.with_modulus(Modulus::Linear(3.0 * lip * lip));
    }
    Ok(op)
}

/// How a family of operators is combined into one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    /// `sup_α F_α` (all members flattened).
    Sup,
    /// `sup_α inf_β F_{αβ}`.
    SupInf,
    /// `inf_α sup_β F_{αβ}`.
    InfSup,
    /// `max{F, G, ...}`, the obstacle-from-above form.
    MaxWith,
    /// `min{F, G, ...}`, the obstacle-from-below form.
    MinWith,
}

/// Members indexed by `α` (outer) and `β` (inner).
#[derive(Clone)]
pub struct OperatorFamily {
    pub members: Vec<Vec<OperatorSpec>>,
    pub combine: Combine,
}

impl OperatorFamily {
    pub fn sup(members: Vec<OperatorSpec>) -> Self {
        Self {
            members: vec![members],
            combine: Combine::Sup,
        }
    }

    pub fn sup_inf(members: Vec<Vec<OperatorSpec>>) -> Self {
        Self {
            members,
            combine: Combine::SupInf,
        }
    }

    pub fn inf_sup(members: Vec<Vec<OperatorSpec>>) -> Self {
        Self {
            members,
            combine: Combine::InfSup,
        }
    }

    pub fn max_with(f: OperatorSpec, g: OperatorSpec) -> Self {
        Self {
            members: vec![vec![f, g]],
            combine: Combine::MaxWith,
        }
    }

    pub fn min_with(f: OperatorSpec, g: OperatorSpec) -> Self {
        Self {
            members: vec![vec![f, g]],
            combine: Combine::MinWith,
        }
    }
}

fn merged_meta(ops: &[OperatorSpec]) -> (Option<f64>, Option<(f64, f64)>, bool) {
    let gamma = ops
        .iter()
        .map(|o| o.gamma())
        .try_fold(f64::INFINITY, |m, g| g.map(|g| m.min(g)));
    let elliptic = ops.iter().map(|o| o.elliptic_constants()).try_fold(
        (f64::INFINITY, 0.0_f64),
        |(l, u), e| e.map(|(a, b)| (l.min(a), u.max(b))),
    );
    let first = ops.iter().all(|o| o.first_order_only());
    (gamma, elliptic, first)
}

fn build_node(kind_sup: bool, ops: Vec<OperatorSpec>, name: String) -> OperatorSpec {
    if ops.len() == 1 {
        return ops.into_iter().next().expect("one member");
    }
    let dim = ops[0].dim();
    let (gamma, elliptic, first) = merged_meta(&ops);
    let domain = (ops[0].domain().0.to_vec(), ops[0].domain().1.to_vec());
    let kind = if kind_sup { Kind::Sup(ops) } else { Kind::Inf(ops) };
    let mut op = OperatorSpec::family(dim, name, kind)
        .with_domain(domain.0, domain.1)
        .expect("domain of a member is valid");
    if let Some(g) = gamma {
        op = op.with_gamma(g);
    }
    if let Some((l, u)) = elliptic {
        op = op.with_elliptic_constants(l, u);
    }
    if first {
        op = op.first_order();
    }
    op
}

/// Pointwise sup / inf combinations of proper operators.
pub fn combine(fam: OperatorFamily) -> Result<OperatorSpec> {
    if fam.members.is_empty() || fam.members.iter().any(|m| m.is_empty()) {
        return invalid("operator family has no members");
    }
    let dim = fam.members[0][0].dim();
    if fam.members.iter().flatten().any(|o| o.dim() != dim) {
        return invalid("family members must share a dimension");
    }
    let label = match fam.combine {
        Combine::Sup => "sup",
        Combine::SupInf => "sup-inf",
        Combine::InfSup => "inf-sup",
        Combine::MaxWith => "max-with",
        Combine::MinWith => "min-with",
    };
    let op = match fam.combine {
        Combine::Sup | Combine::MaxWith => {
            build_node(true, fam.members.into_iter().flatten().collect(), label.into())
        }
        Combine::MinWith => build_node(false, fam.members.into_iter().flatten().collect(), label.into()),
        Combine::SupInf => {
            let inner = fam
                .members
                .into_iter()
                .map(|row| build_node(false, row, "inf".into()))
                .collect();
            build_node(true, inner, label.into())
        }
        Combine::InfSup => {
            let inner = fam
                .members
                .into_iter()
                .map(|row| build_node(true, row, "sup".into()))
                .collect();
            build_node(false, inner, label.into())
        }
    };
    Ok(op)
}

/// `g(x, r, p, s)` receives `s_k = -λ_{which[k]}(X)`.
pub type EigenFn = Arc<dyn Fn(&[f64], f64, &[f64], &[f64]) -> f64 + Send + Sync>;

/// `F(x, r, p, X) = g(x, r, p, -λ_{i_1}(X), ..., -λ_{i_k}(X))` where the
/// eigenvalues are sorted ascending and `which` holds 0-based positions.
/// Rejects `g` that is seen to decrease in `r` or in an eigenvalue slot.
pub fn make_eigenvalue_operator(dim: usize, g: EigenFn, which: Vec<usize>) -> Result<OperatorSpec> {
    if which.is_empty() || which.iter().any(|&k| k >= dim) {
        return invalid("eigenvalue positions must lie in 0..dim");
    }
    let mut s = Sampler::new(0xe16e);
    for _ in 0..COEFF_SAMPLES {
        let x = s.vector(dim, 1.0);
        let p = s.vector(dim, 2.0);
        let r = s.uniform(2.0);
        let slots = s.vector(which.len(), 2.0);
        let base = g(&x, r, &p, &slots);
        let up_r = g(&x, r + s.unit(), &p, &slots);
        let k = (s.unit() * which.len() as f64) as usize % which.len();
        let mut bumped = slots.clone();
        bumped[k] += s.unit();
        let up_s = g(&x, r, &p, &bumped);
        let tol = 1e-10 * (1.0 + base.abs());
        if up_r < base - tol || up_s < base - tol {
            return invalid("eigenvalue map is not nondecreasing in r and the eigenvalue slots");
        }
    }
    let name = format!("eigen{which:?}");
    Ok(OperatorSpec::new(dim, name, move |x, r, p, m: &SymMatrix| {
        let Some(ev) = m.eigenvalues() else {
            return f64::NAN;
        };
        let slots: Vec<f64> = which.iter().map(|&k| -ev[k]).collect();
        g(x, r, p, &slots)
    }))
}

/// `-|trace X|^{m-1} trace X + |p|^q + c r - f(x)`.
pub fn make_trace_power(dim: usize, m: f64, q: f64, c: f64, f: ScalarField) -> Result<OperatorSpec> {
    if !(m > 0.0 && q > 0.0 && c >= 0.0) {
        return invalid("trace-power operator needs m > 0, q > 0, c >= 0");
    }
    let op = OperatorSpec::new(dim, "trace-power", move |x, r, p, mat: &SymMatrix| {
        let t = mat.trace();
        let np = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        -t.abs().powf(m - 1.0) * t + np.powf(q) + c * r - f(x)
    })
    .with_gamma(c);
    Ok(op)
}

/// The mean-curvature operator with its lower and upper envelopes at `p = 0`.
#[derive(Clone, Debug)]
pub struct MeanCurvature {
    /// Defined for `p != 0`; at `p = 0` it returns the midpoint `0` of the
    /// envelope bracket.
    pub f: OperatorSpec,
    pub lower: OperatorSpec,
    pub upper: OperatorSpec,
}

/// `-trace((I - p⊗p/|p|²) X)` evaluated as `-(trace X - <Xp,p>/|p|²)`.
pub fn mean_curvature_value(p: &[f64], m: &SymMatrix) -> Option<f64> {
    let np2: f64 = p.iter().map(|v| v * v).sum();
    if np2 == 0.0 {
        return None;
    }
    Some(-(m.trace() - m.quad_form(p) / np2))
}

pub fn make_mean_curvature(dim: usize) -> Result<MeanCurvature> {
    if !(2..=3).contains(&dim) {
        return invalid("mean curvature operator is provided for dimensions 2 and 3");
    }
    let f = OperatorSpec::new(dim, "mcf", |_, _, p, m| mean_curvature_value(p, m).unwrap_or(0.0));
    let lower = OperatorSpec::new(dim, "mcf-lower", |_, _, p, m: &SymMatrix| {
        mean_curvature_value(p, m).unwrap_or_else(|| -2.0 * m.norm())
    });
    let upper = OperatorSpec::new(dim, "mcf-upper", |_, _, p, m: &SymMatrix| {
        mean_curvature_value(p, m).unwrap_or_else(|| 2.0 * m.norm())
    });
    Ok(MeanCurvature { f, lower, upper })
}

/// `-|p|^{m-2} trace X - (m-2)|p|^{m-4} <Xp,p> + b(x, r)` for `m >= 2`.
pub fn make_m_laplace(dim: usize, m: f64, b: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>) -> Result<OperatorSpec> {
    if m < 2.0 {
        return invalid("m-Laplace operator is provided for m >= 2");
    }
    Ok(OperatorSpec::new(dim, "m-laplace", move |x, r, p, mat: &SymMatrix| {
        let np2: f64 = p.iter().map(|v| v * v).sum();
        let second = if np2 == 0.0 {
            if m == 2.0 {
                -mat.trace()
            } else {
                0.0
            }
        } else {
            let np = np2.sqrt();
            -np.powf(m - 2.0) * (mat.trace() + (m - 2.0) * mat.quad_form(p) / np2)
        };
        second + b(x, r)
    }))
}

/// `-(1+|p|²)^{-1/2} trace X + (1+|p|²)^{-3/2} <Xp,p> + b(x, r)`.
pub fn make_minimal_surface(dim: usize, b: Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>) -> OperatorSpec {
    OperatorSpec::new(dim, "minimal-surface", move |x, r, p, mat: &SymMatrix| {
        let w2 = 1.0 + p.iter().map(|v| v * v).sum::<f64>();
        let w = w2.sqrt();
        -mat.trace() / w + mat.quad_form(p) / (w2 * w) + b(x, r)
    })
}

/// Coefficient matrix of the three-dimensional Lévi operator.
pub fn levi_matrix(p: &[f64]) -> SymMatrix {
    let (p1, p2, p3) = (p[0], p[1], p[2]);
    let d = 1.0 + p3 * p3;
    SymMatrix::from_rows(&[
        vec![d, 0.0, p3 * p1 - p2],
        vec![0.0, d, p3 * p2 + p1],
        vec![p3 * p1 - p2, p3 * p2 + p1, p1 * p1 + p2 * p2],
    ])
    .expect("matrix is symmetric by construction")
}

/// `-trace(A(p) X)` in three dimensions.
pub fn make_levi() -> OperatorSpec {
    OperatorSpec::new(3, "levi", |_, _, p, mat| -levi_matrix(p).frobenius_dot(mat))
}

/// Samples the sandwich `λ tr P <= F(x,r,p,X-P) - F(x,r,p,X) <= Λ tr P` for
/// `P ⪰ 0`, within `1e-8 (1 + max |F|)`.
pub fn check_uniformly_elliptic(
    op: &OperatorSpec,
    lambda: f64,
    big_lambda: f64,
    sampler: &mut Sampler,
    count: usize,
) -> Result<bool> {
    if !(lambda > 0.0 && big_lambda > 0.0) {
        return invalid("ellipticity constants must be positive");
    }
    let mut rows = Vec::with_capacity(count);
    let mut scale = 1.0_f64;
    for _ in 0..count {
        let smp = sampler.proper_sample(op);
        let pm = &smp.big_x - &smp.big_y;
        let base = op.try_evaluate(&smp.x, smp.r, &smp.p, &smp.big_x)?;
        let lowered = op.try_evaluate(&smp.x, smp.r, &smp.p, &smp.big_y)?;
        scale = scale.max(1.0 + base.abs()).max(1.0 + lowered.abs());
        rows.push((lowered - base, pm.trace()));
    }
    let tol = 1e-8 * scale;
    Ok(rows
        .iter()
        .all(|(d, tr)| lambda * tr <= d + tol && *d <= big_lambda * tr + tol))
}

/// Identifiers accepted by [`catalog`].
pub const CATALOG_IDS: [&str; 9] = [
    "linear",
    "hjb",
    "isaacs",
    "obstacle-max",
    "mcf",
    "m-laplace",
    "minimal-surface",
    "levi",
    "eikonal-plus-u",
];

fn reference_linear(dim: usize, drift: Vec<f64>, tilt: f64, source: f64) -> Result<OperatorSpec> {
    let coef = LinearCoefficients {
        dim,
        a: Arc::new(move |x: &[f64]| {
            let s = 1.0 + 0.25 * tilt * x[0] * x[0];
            SymMatrix::from_upper(dim, |i, j| {
                if i == j {
                    s * (1.0 + 0.5 * i as f64)
                } else {
                    0.25 * s * tilt
                }
            })
        }),
        sigma: None,
        b: Arc::new(move |x: &[f64]| drift.iter().enumerate().map(|(i, d)| d + 0.5 * x[i]).collect()),
        c: Arc::new(move |x: &[f64]| 1.0 + 0.5 * x[0] * x[0]),
        f: Arc::new(move |x: &[f64]| source + x.iter().sum::<f64>()),
        domain: (vec![-1.0; dim], vec![1.0; dim]),
    };
    make_linear(coef)
}

/// Reference instance of a catalog entry in dimension `dim`.
///
/// `levi` exists only in dimension 3 and `mcf` in dimensions 2 and 3.
pub fn catalog(id: &str, dim: usize) -> Result<OperatorSpec> {
    if dim == 0 {
        return invalid("dimension must be positive");
    }
    let op = match id {
        "linear" => reference_linear(dim, vec![0.3; dim], 1.0, 0.0)?,
        "hjb" => combine(OperatorFamily::sup(vec![
            reference_linear(dim, vec![0.5; dim], 1.0, 0.0)?,
            reference_linear(dim, vec![-0.5; dim], -1.0, 0.2)?,
        ]))?
        .with_name("hjb"),
        "isaacs" => combine(OperatorFamily::sup_inf(vec![
            vec![
                reference_linear(dim, vec![0.5; dim], 1.0, 0.0)?,
                reference_linear(dim, vec![-0.5; dim], 0.0, 0.1)?,
            ],
            vec![
                reference_linear(dim, vec![0.2; dim], -1.0, -0.1)?,
                reference_linear(dim, vec![-0.2; dim], 0.5, 0.3)?,
            ],
        ]))?
        .with_name("isaacs"),
        "obstacle-max" => {
            let f = make_linear(LinearCoefficients {
                f: Arc::new(|_| 1.0),
                ..LinearCoefficients::laplacian(dim, 1.0)
            })?;
            let obstacle = OperatorSpec::new(dim, "obstacle", |x: &[f64], r, _, _| {
                r - (0.5 - x.iter().map(|v| v * v).sum::<f64>())
            })
            .first_order()
            .with_gamma(1.0);
            combine(OperatorFamily::max_with(f, obstacle))?.with_name("obstacle-max")
        }
        "mcf" => make_mean_curvature(dim)?.f,
        "m-laplace" => make_m_laplace(dim, 3.0, Arc::new(|_, r| r))?.with_gamma(1.0),
        "minimal-surface" => make_minimal_surface(dim, Arc::new(|_, r| r)).with_gamma(1.0),
        "levi" => {
            if dim != 3 {
                return invalid("the Lévi operator is three-dimensional");
            }
            make_levi()
        }
        "eikonal-plus-u" => OperatorSpec::new(dim, "eikonal-plus-u", |_, r, p, _| {
            r + p.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0
        })
        .first_order()
        .with_gamma(1.0),
        other => return invalid(format!("unknown operator id '{other}'")),
    };
    Ok(op)
}

/// Dimension used for an entry when none is requested.
pub fn default_dim(id: &str) -> usize {
    match id {
        "levi" => 3,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proper::check_proper;

    fn zero_p(dim: usize) -> Vec<f64> {
        vec![0.0; dim]
    }

    #[test]
    fn linear_reproduces_laplacian_and_rejects_indefinite() {
        let op = make_linear(LinearCoefficients {
            f: Arc::new(|x: &[f64]| x[0]),
            ..LinearCoefficients::laplacian(2, 2.0)
        })
        .unwrap();
        let m = SymMatrix::diag(&[1.0, 3.0]);
        assert_eq!(op.evaluate(&[0.5, 0.0], 1.5, &[0.0, 0.0], &m), -4.0 + 3.0 - 0.5);
        assert_eq!(op.gamma(), Some(2.0));
        let bad = LinearCoefficients {
            a: Arc::new(|_| SymMatrix::diag(&[1.0, -1.0])),
            ..LinearCoefficients::laplacian(2, 1.0)
        };
        assert!(matches!(make_linear(bad), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn sigma_modulus_is_three_l_squared() {
        let coef = LinearCoefficients {
            dim: 1,
            a: Arc::new(|x: &[f64]| SymMatrix::diag(&[x[0] * x[0]])),
            sigma: Some((Arc::new(|x: &[f64]| vec![x[0]]), 1.0)),
            b: Arc::new(|_| vec![0.0]),
            c: Arc::new(|_| 1.0),
            f: Arc::new(|_| 0.0),
            domain: (vec![0.0], vec![1.0]),
        };
        let op = make_linear(coef).unwrap();
        assert_eq!(op.modulus(), Some(&Modulus::Linear(3.0)));
        assert!(check_proper(&op, &mut Sampler::new(5), 10_000).unwrap().proper);
    }

    #[test]
    fn eigenvalue_examples() {
        let top = make_eigenvalue_operator(3, Arc::new(|_, _, _, s: &[f64]| s[0]), vec![2]).unwrap();
        let p = zero_p(3);
        assert_eq!(top.evaluate(&p, 0.0, &p, &SymMatrix::identity(3)), -1.0);
        assert_eq!(top.evaluate(&p, 0.0, &p, &SymMatrix::zeros(3)), 0.0);
        assert_eq!(top.evaluate(&p, 0.0, &p, &SymMatrix::scalar(3, -1.0)), 1.0);
        let cube = make_eigenvalue_operator(3, Arc::new(|_, _, _, s: &[f64]| s[0].powi(3)), vec![1]).unwrap();
        let v = cube.evaluate(&p, 0.0, &p, &SymMatrix::diag(&[0.0, 2.0, 5.0]));
        assert!((v + 8.0).abs() < 1e-12, "{v}");
        assert!(make_eigenvalue_operator(2, Arc::new(|_, _, _, s: &[f64]| -s[0]), vec![0]).is_err());
    }

    #[test]
    fn trace_power_example() {
        let op = make_trace_power(2, 1.0, 1.0, 1.0, Arc::new(|_| 0.0)).unwrap();
        let v = op.evaluate(&[0.0, 0.0], 0.0, &[1.0, 0.0], &SymMatrix::identity(2));
        assert_eq!(v, -1.0);
    }

    #[test]
    fn mean_curvature_examples() {
        let mc = make_mean_curvature(2).unwrap();
        let x = [0.0, 0.0];
        let i2 = SymMatrix::identity(2);
        assert_eq!(mc.f.evaluate(&x, 0.0, &[1.0, 0.0], &i2), -1.0);
        assert_eq!(mc.lower.evaluate(&x, 0.0, &[0.0, 0.0], &i2), -2.0);
        assert_eq!(mc.upper.evaluate(&x, 0.0, &[0.0, 0.0], &i2), 2.0);
        assert_eq!(mc.f.evaluate(&x, 0.0, &[0.3, -2.0], &SymMatrix::zeros(2)), 0.0);
    }

    #[test]
    fn ellipticity_examples() {
        let lap = make_linear(LinearCoefficients::laplacian(2, 0.0)).unwrap();
        assert!(check_uniformly_elliptic(&lap, 1.0, 1.0, &mut Sampler::new(1), 2000).unwrap());
        let eik = OperatorSpec::new(2, "abs", |_, _, p, _| p.iter().map(|v| v * v).sum::<f64>().sqrt());
        assert!(!check_uniformly_elliptic(&eik, 0.5, 1.0, &mut Sampler::new(1), 2000).unwrap());
        let aniso = make_linear(LinearCoefficients {
            a: Arc::new(|_| SymMatrix::diag(&[1.0, 2.0])),
            ..LinearCoefficients::laplacian(2, 0.0)
        })
        .unwrap();
        assert!(check_uniformly_elliptic(&aniso, 1.0, 2.0, &mut Sampler::new(2), 2000).unwrap());
        assert!(!check_uniformly_elliptic(&aniso, 1.5, 2.0, &mut Sampler::new(2), 2000).unwrap());
    }

    #[test]
    fn combine_rules() {
        assert!(combine(OperatorFamily::sup(vec![])).is_err());
        let a = OperatorSpec::new(1, "a", |_, r, p, _| r + p[0]);
        let single = combine(OperatorFamily::sup(vec![a.clone()])).unwrap();
        let m = SymMatrix::zeros(1);
        assert_eq!(single.evaluate(&[0.0], 1.0, &[2.0], &m), 3.0);
        let b = OperatorSpec::new(1, "b", |_, r, p, _| r - p[0]);
        let mx = combine(OperatorFamily::max_with(a.clone(), b.clone())).unwrap();
        assert_eq!(mx.evaluate(&[0.0], 1.0, &[2.0], &m), 3.0);
        let mn = combine(OperatorFamily::min_with(a, b)).unwrap();
        assert_eq!(mn.evaluate(&[0.0], 1.0, &[2.0], &m), -1.0);
    }

    #[test]
    fn hjb_gamma_is_one_by_sampling() {
        let l1 = make_linear(LinearCoefficients::laplacian(2, 1.0)).unwrap();
        let l2 = make_linear(LinearCoefficients {
            b: Arc::new(|_| vec![1.0, -1.0]),
            ..LinearCoefficients::laplacian(2, 1.0)
        })
        .unwrap();
        let h = combine(OperatorFamily::sup(vec![l1, l2])).unwrap();
        assert_eq!(h.gamma(), Some(1.0));
        let v = crate::proper::check_gamma(&h, 1.0, &mut Sampler::new(4), 2000).unwrap();
        assert!(v.is_none());
    }

    #[test]
    fn catalog_ids_resolve() {
        for id in CATALOG_IDS {
            let op = catalog(id, default_dim(id)).unwrap();
            assert_eq!(op.dim(), default_dim(id));
        }
        assert!(catalog("levi", 2).is_err());
        assert!(catalog("nope", 2).is_err());
    }
}
