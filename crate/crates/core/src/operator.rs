//! The operator interface `F(x, r, p, X)` with its structural metadata.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::matrix::SymMatrix;

/// Pointwise evaluation `F(x, r, p, X)`.
pub type EvalFn = Arc<dyn Fn(&[f64], f64, &[f64], &SymMatrix) -> f64 + Send + Sync>;

/// Descriptor of the modulus `ω` in the structure condition. Advisory only.
#[derive(Debug, Clone, PartialEq)]
pub enum Modulus {
    /// `ω(t) = c t`.
    Linear(f64),
    /// Piecewise-linear interpolation through `(t, ω(t))` pairs.
    Tabulated(Vec<(f64, f64)>),
}

impl Modulus {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Modulus::Linear(c) => c * t,
            Modulus::Tabulated(pts) => {
                if pts.is_empty() {
                    return 0.0;
                }
                if t <= pts[0].0 {
                    return pts[0].1;
                }
                for w in pts.windows(2) {
                    let ((t0, w0), (t1, w1)) = (w[0], w[1]);
                    if t <= t1 {
                        return w0 + (w1 - w0) * (t - t0) / (t1 - t0);
                    }
                }
                pts[pts.len() - 1].1
            }
        }
    }
}

/// How the members of a family are combined. Families are kept structured so
/// that discretizations can treat each member separately.
#[derive(Clone)]
pub(crate) enum Kind {
    Leaf(EvalFn),
    Sup(Vec<OperatorSpec>),
    Inf(Vec<OperatorSpec>),
}

/// A second-order operator together with the metadata the solvers use.
#[derive(Clone)]
pub struct OperatorSpec {
    dim: usize,
    name: String,
    pub(crate) kind: Kind,
    gamma: Option<f64>,
    modulus: Option<Modulus>,
    elliptic: Option<(f64, f64)>,
    first_order_only: bool,
    domain: (Vec<f64>, Vec<f64>),
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("gamma", &self.gamma)
            .field("modulus", &self.modulus)
            .field("elliptic", &self.elliptic)
            .field("first_order_only", &self.first_order_only)
            .finish()
    }
}

impl OperatorSpec {
    /// Wraps a black-box evaluation. The sampling domain defaults to `[-1, 1]^dim`.
    pub fn new(
        dim: usize,
        name: impl Into<String>,
        f: impl Fn(&[f64], f64, &[f64], &SymMatrix) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::from_arc(dim, name, Arc::new(f))
    }

    pub fn from_arc(dim: usize, name: impl Into<String>, f: EvalFn) -> Self {
        assert!(dim > 0, "operator dimension must be positive");
        Self {
            dim,
            name: name.into(),
            kind: Kind::Leaf(f),
            gamma: None,
            modulus: None,
            elliptic: None,
            first_order_only: false,
            domain: (vec![-1.0; dim], vec![1.0; dim]),
        }
    }

    pub(crate) fn family(dim: usize, name: String, kind: Kind) -> Self {
        Self {
            dim,
            name,
            kind,
            gamma: None,
            modulus: None,
            elliptic: None,
            first_order_only: false,
            domain: (vec![-1.0; dim], vec![1.0; dim]),
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_modulus(mut self, m: Modulus) -> Self {
        self.modulus = Some(m);
        self
    }

    pub fn with_elliptic_constants(mut self, lambda: f64, big_lambda: f64) -> Self {
        self.elliptic = Some((lambda, big_lambda));
        self
    }

    /// Declares that `X` is ignored.
    pub fn first_order(mut self) -> Self {
        self.first_order_only = true;
        self
    }

    pub fn with_domain(mut self, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != self.dim || hi.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: lo.len(),
            });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return invalid("domain box needs lo <= hi");
        }
        self.domain = (lo, hi);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn modulus(&self) -> Option<&Modulus> {
        self.modulus.as_ref()
    }

    pub fn elliptic_constants(&self) -> Option<(f64, f64)> {
        self.elliptic
    }

    pub fn first_order_only(&self) -> bool {
        self.first_order_only
    }

    pub fn domain(&self) -> (&[f64], &[f64]) {
        (&self.domain.0, &self.domain.1)
    }

    /// Number of leaves in the family tree (1 for a plain operator).
    pub fn leaf_count(&self) -> usize {
        match &self.kind {
            Kind::Leaf(_) => 1,
            Kind::Sup(m) | Kind::Inf(m) => m.iter().map(|o| o.leaf_count()).sum(),
        }
    }

    /// `F(x, r, p, X)`.
    pub fn evaluate(&self, x: &[f64], r: f64, p: &[f64], m: &SymMatrix) -> f64 {
        match &self.kind {
            Kind::Leaf(f) => f(x, r, p, m),
            Kind::Sup(members) => members
                .iter()
                .map(|o| o.evaluate(x, r, p, m))
                .fold(f64::NEG_INFINITY, nan_max),
            Kind::Inf(members) => members
                .iter()
                .map(|o| o.evaluate(x, r, p, m))
                .fold(f64::INFINITY, nan_min),
        }
    }

    /// Evaluation that reports non-finite values as errors.
    pub fn try_evaluate(&self, x: &[f64], r: f64, p: &[f64], m: &SymMatrix) -> Result<f64> {
        let v = self.evaluate(x, r, p, m);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                x: x.to_vec(),
                r,
                p: p.to_vec(),
                value: v,
            })
        }
    }
}

/// `max` that propagates NaN instead of discarding it.
pub(crate) fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else if b > a {
        b
    } else {
        a
    }
}

/// `min` that propagates NaN instead of discarding it.
pub(crate) fn nan_min(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else if b < a {
        b
    } else {
        a
    }
}
