//! Doubling of variables, the matrix sandwich and sup/inf-convolution as
//! executable diagnostics.
//!
//! Maximizations run in floating point and every near-tie is re-decided in
//! exact rational arithmetic on the ideal grid coordinates
//! `lo + k (hi - lo) / (n - 1)`, so the order relations asserted on the
//! results hold exactly rather than up to rounding.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, GridFn};
use crate::jet::Jet;
use crate::jets::{superjet_test, JetProbeConfig};
use crate::matrix::SymMatrix;

/// Relative width of the float window in which candidates are re-decided exactly.
const TIE_WINDOW: f64 = 1e-9;

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Exact node coordinates per axis.
struct ExactCoords {
    axes: Vec<Vec<BigRational>>,
}

impl ExactCoords {
    fn new(grid: &Grid) -> Self {
        let axes = (0..grid.dim())
            .map(|a| {
                let lo = rat(grid.lo()[a]);
                let hi = rat(grid.hi()[a]);
                let m = grid.n()[a] - 1;
                let step = (hi - &lo) / BigRational::from_integer(BigInt::from(m));
                (0..=m)
                    .map(|k| &lo + &step * BigRational::from_integer(BigInt::from(k)))
                    .collect()
            })
            .collect();
        Self { axes }
    }

    /// A single exact coordinate, for callers that need only a few.
    fn single(grid: &Grid, axis: usize, k: usize) -> BigRational {
        let lo = rat(grid.lo()[axis]);
        let hi = rat(grid.hi()[axis]);
        let m = BigRational::from_integer(BigInt::from(grid.n()[axis] - 1));
        &lo + (hi - &lo) / m * BigRational::from_integer(BigInt::from(k))
    }

    fn dist_sq(&self, grid: &Grid, i: usize, j: usize) -> BigRational {
        let mut s = BigRational::zero();
        for a in 0..grid.dim() {
            let d = &self.axes[a][grid.axis_index(i, a)] - &self.axes[a][grid.axis_index(j, a)];
            s += &d * &d;
        }
        s
    }

    fn norm_sq(&self, grid: &Grid, i: usize) -> BigRational {
        let mut s = BigRational::zero();
        for a in 0..grid.dim() {
            let c = &self.axes[a][grid.axis_index(i, a)];
            s += c * c;
        }
        s
    }
}

/// Visits the nodes of the index box of half-widths `reach` around `center`.
fn for_box(grid: &Grid, center: usize, reach: &[usize], mut f: impl FnMut(usize)) {
    let dim = grid.dim();
    let c = grid.multi_index(center);
    let lo: Vec<usize> = (0..dim).map(|a| c[a].saturating_sub(reach[a])).collect();
    let hi: Vec<usize> = (0..dim).map(|a| (c[a] + reach[a]).min(grid.n()[a] - 1)).collect();
    let mut cur = lo.clone();
    loop {
        f(grid.index(&cur));
        let mut a = 0;
        loop {
            if a == dim {
                return;
            }
            if cur[a] < hi[a] {
                cur[a] += 1;
                break;
            }
            cur[a] = lo[a];
            a += 1;
        }
    }
}

fn reach_for(grid: &Grid, radius_sq: f64) -> Vec<usize> {
    let r = radius_sq.max(0.0).sqrt();
    grid.h()
        .iter()
        .zip(grid.n())
        .map(|(h, n)| {
            let k = (r / h).ceil();
            if k.is_finite() && k < *n as f64 {
                k as usize
            } else {
                n - 1
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingResult {
    pub alpha: f64,
    pub xhat: usize,
    pub yhat: usize,
    /// `u(x̂) - v(ŷ) - penalty`, evaluated in floating point.
    pub m_alpha: f64,
    /// `(alpha / 2) |x̂ - ŷ|²`.
    pub penalty: f64,
    /// The maximum in exact arithmetic.
    pub exact_m: BigRational,
    /// `|x̂ - ŷ|²` in exact arithmetic.
    pub exact_dist_sq: BigRational,
}

/// Exact argmax of `u(x) - v(y) - (alpha/2)|x - y|²` over all node pairs for
/// every `alpha` of a strictly increasing schedule. Ties go to the
/// lexicographically smallest `(x, y)`.
pub fn doubling_maximize(u: &GridFn, v: &GridFn, alphas: &[f64]) -> Result<Vec<DoublingResult>> {
    let grid = u.grid().clone();
    if !grid.same_shape(v.grid()) {
        return invalid("doubling needs u and v on one grid");
    }
    if u.values().iter().chain(v.values()).any(|x| !x.is_finite()) {
        return invalid("doubling needs finite u and v");
    }
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return invalid("alpha schedule must be nonempty and positive");
    }
    if alphas.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("alpha schedule must be strictly increasing");
    }
    let coords = ExactCoords::new(&grid);
    let uv = u.values();
    let vv = v.values();
    let scale = 1.0 + u.sup_norm() + v.sup_norm();
    let diag = (0..grid.len()).map(|i| uv[i] - vv[i]).fold(f64::NEG_INFINITY, f64::max);
    let spread = u.max() - v.min() - diag;
    let cell: f64 = grid.h().iter().map(|h| h * h).sum();
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        // pairs farther apart than this lose to the diagonal
        let band = 2.0 * spread.max(0.0) / alpha * (1.0 + 1e-6) + 4.0 * cell;
        let reach = reach_for(&grid, band);
        let pair_value = |i: usize, j: usize| uv[i] - vv[j] - 0.5 * alpha * grid.node_distance_sq(i, j);
        let best = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let mut b = f64::NEG_INFINITY;
                for_box(&grid, i, &reach, |j| b = b.max(pair_value(i, j)));
                b
            })
            .reduce(|| f64::NEG_INFINITY, f64::max);
        let floor = best - TIE_WINDOW * scale;
        let candidates: Vec<(usize, usize)> = (0..grid.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let mut c = Vec::new();
                for_box(&grid, i, &reach, |j| {
                    if pair_value(i, j) >= floor {
                        c.push((i, j));
                    }
                });
                c
            })
            .collect();
        let half_alpha = rat(alpha) / BigRational::from_integer(BigInt::from(2));
        let mut winner: Option<(BigRational, BigRational, usize, usize)> = None;
        for (i, j) in candidates {
            let d2 = coords.dist_sq(&grid, i, j);
            let val = rat(uv[i]) - rat(vv[j]) - &half_alpha * &d2;
            let better = match &winner {
                None => true,
                Some((w, _, wi, wj)) => val > *w || (val == *w && (i, j) < (*wi, *wj)),
            };
            if better {
                winner = Some((val, d2, i, j));
            }
        }
        let (exact_m, exact_dist_sq, xhat, yhat) = winner.expect("at least one pair");
        let penalty = 0.5 * alpha * grid.node_distance_sq(xhat, yhat);
        out.push(DoublingResult {
            alpha,
            xhat,
            yhat,
            m_alpha: (uv[xhat] - vv[yhat]) - penalty,
            penalty,
            exact_m,
            exact_dist_sq,
        });
    }
    Ok(out)
}

/// Exact relations between consecutive schedule entries `alpha' < alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainCheck {
    pub alpha_prev: f64,
    pub alpha: f64,
    /// `M_alpha <= M_alpha'`.
    pub monotone: bool,
    /// `(alpha - alpha') |x̂ - ŷ|² <= 2 (M_alpha' - M_alpha)`, the bound that
    /// follows from comparing the two maxima; for `alpha' = alpha / 2` this is
    /// `(alpha / 2) |x̂ - ŷ|² <= 2 (M_{alpha/2} - M_alpha)`.
    pub penalty_bound: bool,
    /// The stronger `alpha |x̂ - ŷ|² <= 2 (M_alpha' - M_alpha)`.
    pub full_bound: bool,
    /// `alpha |x̂ - ŷ|²` rounded.
    pub lhs: f64,
    /// `2 (M_alpha' - M_alpha)` rounded.
    pub rhs: f64,
}

pub fn doubling_chain(results: &[DoublingResult]) -> Vec<ChainCheck> {
    results
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let two = BigRational::from_integer(BigInt::from(2));
            let decrease = (&a.exact_m - &b.exact_m) * &two;
            let gap = rat(b.alpha) - rat(a.alpha);
            let full = rat(b.alpha) * &b.exact_dist_sq;
            ChainCheck {
                alpha_prev: a.alpha,
                alpha: b.alpha,
                monotone: b.exact_m <= a.exact_m,
                penalty_bound: gap * &b.exact_dist_sq <= decrease,
                full_bound: full <= decrease,
                lhs: full.to_f64().unwrap_or(f64::NAN),
                rhs: decrease.to_f64().unwrap_or(f64::NAN),
            }
        })
        .collect()
}

/// Checks `-3 alpha I <= diag(X, -Y) <= 3 alpha [[I, -I], [-I, I]]` by
/// eigenvalues with slack `1e-10`. When both hold, the consequence `X <= Y`
/// is verified as well and a violation is reported as an error.
pub fn matrix_doubling_bound_check(x: &SymMatrix, y: &SymMatrix, alpha: f64) -> Result<bool> {
    let n = x.dim();
    if y.dim() != n {
        return Err(Error::Dimension {
            expected: n,
            got: y.dim(),
        });
    }
    let zero = SymMatrix::zeros(n);
    let middle = SymMatrix::block(x, &zero, &-y);
    let lower = SymMatrix::scalar(2 * n, -3.0 * alpha);
    let i3 = SymMatrix::scalar(n, 3.0 * alpha);
    let upper = SymMatrix::block(&i3, &-&i3, &i3);
    let left = (&middle - &lower).min_eigenvalue() >= -1e-10;
    let right = (&upper - &middle).min_eigenvalue() >= -1e-10;
    let holds = left && right;
    if holds {
        let slack = 1e-10 * (1.0 + x.norm() + y.norm());
        if (y - x).min_eigenvalue() < -slack {
            return invalid("sandwich holds but X <= Y fails");
        }
    }
    Ok(holds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvolutionKind {
    /// `sup_x (v(x) - (lambda/2)|x - ξ|²)`
    Sup,
    /// `inf_x (v(x) + (lambda/2)|x - ξ|²)`
    Inf,
}

#[derive(Debug, Clone)]
pub struct SupConvolution {
    pub source: GridFn,
    pub lambda: f64,
    pub kind: ConvolutionKind,
    pub result: GridFn,
    /// Exact values of `result` before rounding.
    pub exact: Vec<BigRational>,
    /// Every exact maximizer (minimizer for `Inf`) per node, ascending.
    pub maximizers: Vec<Vec<usize>>,
}

fn convolve_sup(v: &GridFn, lambda: f64) -> Result<(Vec<BigRational>, Vec<Vec<usize>>)> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return invalid("lambda must be positive");
    }
    let vals = v.values();
    if vals.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
        return invalid("convolution needs values below +inf");
    }
    let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return invalid("function is identically -inf");
    }
    let grid = v.grid().clone();
    let coords = ExactCoords::new(&grid);
    let cell: f64 = grid.h().iter().map(|h| h * h).sum();
    let scale = 1.0 + vals.iter().filter(|x| x.is_finite()).fold(0.0_f64, |m, x| m.max(x.abs()));
    let half_lambda = rat(lambda) / BigRational::from_integer(BigInt::from(2));
    let full: Vec<usize> = grid.n().iter().map(|n| n - 1).collect();
    let per_node: Vec<(BigRational, Vec<usize>)> = (0..grid.len())
        .into_par_iter()
        .map(|xi| {
            let reach = if vals[xi].is_finite() {
                reach_for(&grid, 2.0 * (top - vals[xi]) / lambda * (1.0 + 1e-6) + cell)
            } else {
                full.clone()
            };
            let value = |x: usize| vals[x] - 0.5 * lambda * grid.node_distance_sq(x, xi);
            let mut best = f64::NEG_INFINITY;
            for_box(&grid, xi, &reach, |x| {
                if vals[x].is_finite() {
                    best = best.max(value(x));
                }
            });
            let floor = best - TIE_WINDOW * scale;
            let mut winner: Option<BigRational> = None;
            let mut args = Vec::new();
            for_box(&grid, xi, &reach, |x| {
                if !vals[x].is_finite() || value(x) < floor {
                    return;
                }
                let exact = rat(vals[x]) - &half_lambda * coords.dist_sq(&grid, x, xi);
                match &winner {
                    Some(w) if exact < *w => {}
                    Some(w) if exact == *w => args.push(x),
                    _ => {
                        winner = Some(exact);
                        args.clear();
                        args.push(x);
                    }
                }
            });
            args.sort_unstable();
            (winner.expect("a finite candidate exists"), args)
        })
        .collect();
    Ok(per_node.into_iter().unzip())
}

/// `v̂(ξ) = max_x (v(x) - (lambda/2)|x - ξ|²)` over the nodes that can attain
/// the maximum.
pub fn sup_convolve(v: &GridFn, lambda: f64) -> Result<SupConvolution> {
    let (exact, maximizers) = convolve_sup(v, lambda)?;
    let values = exact.iter().map(|e| e.to_f64().expect("finite")).collect();
    Ok(SupConvolution {
        source: v.clone(),
        lambda,
        kind: ConvolutionKind::Sup,
        result: GridFn::new(v.grid().clone(), values)?,
        exact,
        maximizers,
    })
}

/// `v̌(ξ) = min_x (v(x) + (lambda/2)|x - ξ|²)`, computed as `-sup_convolve(-v)`.
pub fn inf_convolve(v: &GridFn, lambda: f64) -> Result<SupConvolution> {
    if v.values().iter().any(|x| x.is_nan() || *x == f64::NEG_INFINITY) {
        return invalid("inf-convolution needs values above -inf");
    }
    let neg: Vec<f64> = v.values().iter().map(|x| -x).collect();
    let neg = GridFn::new_extended(v.grid().clone(), neg)?;
    let (exact, maximizers) = convolve_sup(&neg, lambda)?;
    let exact: Vec<BigRational> = exact.into_iter().map(|e| -e).collect();
    let values = exact.iter().map(|e| e.to_f64().expect("finite")).collect();
    Ok(SupConvolution {
        source: v.clone(),
        lambda,
        kind: ConvolutionKind::Inf,
        result: GridFn::new(v.grid().clone(), values)?,
        exact,
        maximizers,
    })
}

impl SupConvolution {
    /// `result >= source` (`<=` for `Inf`) at every node, on the rounded values.
    pub fn dominates_source(&self) -> bool {
        let s = self.source.values();
        let r = self.result.values();
        match self.kind {
            ConvolutionKind::Sup => r.iter().zip(s).all(|(a, b)| a >= b),
            ConvolutionKind::Inf => r.iter().zip(s).all(|(a, b)| a <= b),
        }
    }

    /// Exact midpoint convexity of `result + (lambda/2)|ξ|²` along every axis
    /// (concavity of `result - (lambda/2)|ξ|²` for `Inf`).
    pub fn midpoint_convex(&self) -> bool {
        let grid = self.result.grid();
        let coords = ExactCoords::new(grid);
        let half_lambda = rat(self.lambda) / BigRational::from_integer(BigInt::from(2));
        let w: Vec<BigRational> = (0..grid.len())
            .map(|i| {
                let q = &half_lambda * coords.norm_sq(grid, i);
                match self.kind {
                    ConvolutionKind::Sup => &self.exact[i] + q,
                    ConvolutionKind::Inf => -(&self.exact[i] - q),
                }
            })
            .collect();
        let two = BigRational::from_integer(BigInt::from(2));
        (0..grid.len()).all(|i| {
            (0..grid.dim()).all(|a| match (grid.shift(i, a, -1), grid.shift(i, a, 1)) {
                (Some(l), Some(r)) => &w[l] + &w[r] >= &two * &w[i],
                _ => true,
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MagicReport {
    /// The maximizer `y` of `v(x) - (lambda/2)|x - η|²`.
    pub maximizer: usize,
    /// `lambda (y - η)`.
    pub q: Vec<f64>,
    /// `|v̂(η) + |q|²/(2 lambda) - v(y)|` in exact arithmetic, rounded.
    pub identity_residual: f64,
    /// Whether `(q, lambda I)` passes the superjet test of `v` at `y`.
    pub jet_membership: bool,
}

/// Checks the identity `v̂(η) + |q|²/(2λ) = v(η + q/λ)` and the jet transport
/// `(q, λI) ∈ J^{2,+} v(y)` at an interior node with a unique maximizer.
pub fn magic_identity_check(sc: &SupConvolution, eta: usize) -> Result<MagicReport> {
    if sc.kind != ConvolutionKind::Sup {
        return invalid("the identity is stated for sup-convolutions");
    }
    let grid = sc.result.grid();
    if eta >= grid.len() || grid.is_boundary(eta) {
        return invalid(format!("node {eta} is not interior"));
    }
    let args = &sc.maximizers[eta];
    if args.len() != 1 {
        return Err(Error::NonUnique {
            node: eta,
            count: args.len(),
        });
    }
    let y = args[0];
    let lam = rat(sc.lambda);
    let q_exact: Vec<BigRational> = (0..grid.dim())
        .map(|a| {
            let cy = ExactCoords::single(grid, a, grid.axis_index(y, a));
            let ce = ExactCoords::single(grid, a, grid.axis_index(eta, a));
            &lam * (cy - ce)
        })
        .collect();
    let q_sq = q_exact.iter().fold(BigRational::zero(), |s, c| s + c * c);
    let two = BigRational::from_integer(BigInt::from(2));
    let residual = (&sc.exact[eta] + q_sq / (&two * &lam) - rat(sc.source.get(y))).abs();
    let xe = grid.point(eta);
    let xy = grid.point(y);
    let q: Vec<f64> = xy.iter().zip(&xe).map(|(a, b)| sc.lambda * (a - b)).collect();
    let jet = Jet::new(q.clone(), SymMatrix::scalar(grid.dim(), sc.lambda))?;
    let jet_membership = superjet_test(&sc.source, y, &jet, &JetProbeConfig::for_grid(grid))?;
    Ok(MagicReport {
        maximizer: y,
        q,
        identity_residual: residual.to_f64().unwrap_or(f64::NAN),
        jet_membership,
    })
}

/// A continuous piecewise-linear function on a line grid with `pieces`
/// segments; breakpoints and knot values in `[-1, 1]` are drawn from `seed`.
pub fn seeded_piecewise_linear(grid: Arc<Grid>, seed: u64, pieces: usize) -> Result<GridFn> {
    if grid.dim() != 1 {
        return invalid("piecewise-linear samples are one-dimensional");
    }
    if pieces == 0 {
        return invalid("need at least one piece");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (grid.lo()[0], grid.hi()[0]);
    let mut xs: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(lo..hi)).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.insert(0, lo);
    xs.push(hi);
    let ys: Vec<f64> = (0..xs.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    GridFn::from_fn(grid, |x| {
        let t = x[0];
        let k = xs.partition_point(|b| *b <= t).clamp(1, xs.len() - 1);
        let (x0, x1) = (xs[k - 1], xs[k]);
        if x1 <= x0 {
            return ys[k];
        }
        ys[k - 1] + (ys[k] - ys[k - 1]) * (t - x0) / (x1 - x0)
    })
}
