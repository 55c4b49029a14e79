//! Closed-form reference solutions used as oracles.

use std::sync::Arc;

use crate::error::{invalid, Result};

/// A named closed-form function of the space variable.
#[derive(Clone)]
pub struct ClosedForm {
    pub id: String,
    pub dim: usize,
    eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    /// Where the formula comes from, in words.
    pub description: &'static str,
}

impl std::fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClosedForm")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .finish()
    }
}

impl ClosedForm {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// Looks up an oracle by id. `eps` is used by `neumann-exact`.
    pub fn by_id(id: &str, eps: Option<f64>) -> Result<Self> {
        let form = match id {
            "neumann-exact" => {
                let eps = eps.unwrap_or(0.01);
                neumann_exact(eps, 0.0)?;
                Self {
                    id: id.into(),
                    dim: 1,
                    eval: Arc::new(move |x| neumann_exact(eps, x[0]).unwrap_or(f64::NAN)),
                    description: "viscous Neumann boundary-layer problem",
                }
            }
            "neumann-limit" => Self {
                id: id.into(),
                dim: 1,
                eval: Arc::new(|x| neumann_limit(x[0])),
                description: "vanishing-viscosity limit of the Neumann problem",
            },
            "eikonal-plus-u" => Self {
                id: id.into(),
                dim: 1,
                eval: Arc::new(|x| eikonal_fixed_point(x[0])),
                description: "u + |u'| = 1 on (-1, 1) with zero Dirichlet data",
            },
            "counterexample" => Self {
                id: id.into(),
                dim: 2,
                eval: Arc::new(|x| counterexample_branch(x[0], x[1]).unwrap_or(f64::NAN)),
                description: "per-slice solution of u + x u_y = 0 on the unit box",
            },
            "kink-concave" => Self {
                id: id.into(),
                dim: 1,
                eval: Arc::new(|x| eikonal_kinks(KinkVariant::Concave, x[0])),
                description: "-|x|, a solution of (u')^2 - 1 = 0",
            },
            "kink-convex" => Self {
                id: id.into(),
                dim: 1,
                eval: Arc::new(|x| eikonal_kinks(KinkVariant::Convex, x[0])),
                description: "|x|, a solution of -(u')^2 + 1 = 0",
            },
            other => return invalid(format!("unknown closed form '{other}'")),
        };
        Ok(form)
    }
}

/// Ids accepted by [`ClosedForm::by_id`].
pub const CLOSED_FORM_IDS: [&str; 6] = [
    "neumann-exact",
    "neumann-limit",
    "eikonal-plus-u",
    "counterexample",
    "kink-concave",
    "kink-convex",
];

/// Characteristic roots `(1 ± sqrt(1 + 4 eps)) / (2 eps)`.
pub fn neumann_roots(eps: f64) -> (f64, f64) {
    let s = (1.0 + 4.0 * eps).sqrt();
    ((1.0 + s) / (2.0 * eps), (1.0 - s) / (2.0 * eps))
}

/// `(u, u', u'')` of the solution of `-eps u'' + u' + u = x + 1`, `u'(0) = u'(1) = 0`.
///
/// The two exponential modes are rescaled by `e^{-λ₊}` so that small `eps`
/// does not overflow; the value is algebraically the displayed formula.
pub fn neumann_exact_jet(eps: f64, x: f64) -> Result<(f64, f64, f64)> {
    if !(eps > 0.0) {
        return invalid("eps must be positive");
    }
    let (lp, lm) = neumann_roots(eps);
    // 1 - e^{λ₋ - λ₊} = (e^{λ₊} - e^{λ₋}) e^{-λ₊}
    let den = -(lm - lp).exp_m1();
    let ep = (lp * (x - 1.0)).exp();
    let em = (lm * x).exp();
    let cp = lm.exp_m1() / (lp * den);
    let cm = (-lp).exp_m1() / (lm * den);
    let u = x + cp * ep + cm * em;
    let du = 1.0 + cp * lp * ep + cm * lm * em;
    let ddu = cp * lp * lp * ep + cm * lm * lm * em;
    Ok((u, du, ddu))
}

pub fn neumann_exact(eps: f64, x: f64) -> Result<f64> {
    neumann_exact_jet(eps, x).map(|j| j.0)
}

/// `x + e^{-x}`.
pub fn neumann_limit(x: f64) -> f64 {
    x + (-x).exp()
}

/// `1 - e^{|x| - 1}`, the fixed point of `u + |u'| = 1` on `(-1, 1)`.
pub fn eikonal_fixed_point(x: f64) -> f64 {
    1.0 - (x.abs() - 1.0).exp()
}

/// `0` for `x > 0`, `e^{(1-y)/x}` for `x < 0`.
pub fn counterexample_branch(x: f64, y: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return invalid("the branch formula needs x != 0");
    }
    Ok(if x > 0.0 { 0.0 } else { ((1.0 - y) / x).exp() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KinkVariant {
    /// `-|x|`
    Concave,
    /// `|x|`
    Convex,
}

pub fn eikonal_kinks(variant: KinkVariant, x: f64) -> f64 {
    match variant {
        KinkVariant::Concave => -x.abs(),
        KinkVariant::Convex => x.abs(),
    }
}

/// `sqrt(R0² - 2(N-1)t)`; `None` at or after extinction.
pub fn shrinking_radius(r0: f64, t: f64, dim: usize) -> Option<f64> {
    let s = r0 * r0 - 2.0 * (dim as f64 - 1.0) * t;
    (s > 0.0).then(|| s.sqrt())
}

pub fn extinction_time(r0: f64, dim: usize) -> f64 {
    r0 * r0 / (2.0 * (dim as f64 - 1.0))
}

/// Centered-difference residual `-eps u'' + u' + u - (x + 1)` with step `h`.
pub fn neumann_fd_residual(eps: f64, x: f64, h: f64) -> Result<f64> {
    let f = |s: f64| neumann_exact(eps, s);
    let (um, u0, up) = (f(x - h)?, f(x)?, f(x + h)?);
    let d1 = (up - um) / (2.0 * h);
    let d2 = (up - 2.0 * u0 + um) / (h * h);
    Ok(-eps * d2 + d1 + u0 - (x + 1.0))
}
