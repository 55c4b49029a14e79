//! Seeded sampling checks of properness and strict monotonicity in `r`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::matrix::SymMatrix;
use crate::operator::OperatorSpec;

/// Relative tolerance of the properness inequality.
pub const PROPER_TOL: f64 = 1e-10;

/// Random source of admissible sample tuples.
///
/// `x` is drawn from the operator's domain box; `r`, `p` and the entries of
/// `X` from symmetric intervals of the given half-widths.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    pub r_range: f64,
    pub p_range: f64,
    pub x_range: f64,
}

/// One ordered sample: `r <= s` and `Y ⪯ X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProperSample {
    pub x: Vec<f64>,
    pub r: f64,
    pub s: f64,
    pub p: Vec<f64>,
    pub big_x: SymMatrix,
    pub big_y: SymMatrix,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            r_range: 2.0,
            p_range: 2.0,
            x_range: 2.0,
        }
    }

    pub fn with_ranges(mut self, r: f64, p: f64, x: f64) -> Self {
        self.r_range = r;
        self.p_range = p;
        self.x_range = x;
        self
    }

    pub fn uniform(&mut self, half_width: f64) -> f64 {
        self.rng.gen_range(-half_width..=half_width)
    }

    pub fn unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn point_in(&mut self, lo: &[f64], hi: &[f64]) -> Vec<f64> {
        lo.iter()
            .zip(hi)
            .map(|(a, b)| if a == b { *a } else { self.rng.gen_range(*a..=*b) })
            .collect()
    }

    pub fn vector(&mut self, dim: usize, half_width: f64) -> Vec<f64> {
        (0..dim).map(|_| self.uniform(half_width)).collect()
    }

    pub fn symmetric(&mut self, dim: usize, half_width: f64) -> SymMatrix {
        SymMatrix::from_upper(dim, |_, _| self.uniform(half_width))
    }

    /// Positive semidefinite matrix: zero, rank one, or full rank `BᵀB`.
    pub fn psd(&mut self, dim: usize, half_width: f64) -> SymMatrix {
        match self.rng.gen_range(0..4) {
            0 => SymMatrix::zeros(dim),
            1 => {
                let v = self.vector(dim, half_width.sqrt());
                SymMatrix::outer(&v)
            }
            _ => {
                let b: Vec<Vec<f64>> = (0..dim).map(|_| self.vector(dim, half_width.sqrt())).collect();
                SymMatrix::from_upper(dim, |i, j| (0..dim).map(|k| b[k][i] * b[k][j]).sum())
            }
        }
    }

    /// Draws `(x, r <= s, p, Y ⪯ X)` for `op`.
    pub fn proper_sample(&mut self, op: &OperatorSpec) -> ProperSample {
        let dim = op.dim();
        let (lo, hi) = op.domain();
        let x = self.point_in(lo, hi);
        let r = self.uniform(self.r_range);
        let s = if self.rng.gen_range(0..4) == 0 {
            r
        } else {
            r + self.unit() * self.r_range
        };
        let p = self.vector(dim, self.p_range);
        let big_x = self.symmetric(dim, self.x_range);
        let pm = self.psd(dim, self.x_range);
        let big_y = &big_x - &pm;
        ProperSample {
            x,
            r,
            s,
            p,
            big_x,
            big_y,
        }
    }
}

/// Outcome of a properness check; `witness` is the first violating sample.
#[derive(Debug, Clone)]
pub struct ProperReport {
    pub proper: bool,
    pub witness: Option<Violation>,
    pub samples: usize,
    pub scale: f64,
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub sample: ProperSample,
    /// `F(x, r, p, X)`.
    pub lhs: f64,
    /// `F(x, s, p, Y)`.
    pub rhs: f64,
}

/// Samples `count` ordered tuples and tests `F(x,r,p,X) <= F(x,s,p,Y) + tol`
/// with `tol = 1e-10 (1 + max |F|)` over the samples.
pub fn check_proper(op: &OperatorSpec, sampler: &mut Sampler, count: usize) -> Result<ProperReport> {
    if count == 0 {
        return invalid("check_proper needs at least one sample");
    }
    let mut rows = Vec::with_capacity(count);
    let mut scale = 1.0_f64;
    for _ in 0..count {
        let smp = sampler.proper_sample(op);
        let lhs = op.try_evaluate(&smp.x, smp.r, &smp.p, &smp.big_x)?;
        let rhs = op.try_evaluate(&smp.x, smp.s, &smp.p, &smp.big_y)?;
        scale = scale.max(1.0 + lhs.abs()).max(1.0 + rhs.abs());
        rows.push((smp, lhs, rhs));
    }
    let tol = PROPER_TOL * scale;
    let witness = rows
        .into_iter()
        .find(|(_, lhs, rhs)| *lhs > *rhs + tol)
        .map(|(sample, lhs, rhs)| Violation { sample, lhs, rhs });
    Ok(ProperReport {
        proper: witness.is_none(),
        witness,
        samples: count,
        scale,
    })
}

/// Sampled check of `F(x,r,p,X) - F(x,s,p,X) >= gamma (r - s)` for `r >= s`.
/// Returns the first violating `(x, r, s, p, X)` as a sample (with `Y = X`).
pub fn check_gamma(
    op: &OperatorSpec,
    gamma: f64,
    sampler: &mut Sampler,
    count: usize,
) -> Result<Option<Violation>> {
    let mut rows = Vec::with_capacity(count);
    let mut scale = 1.0_f64;
    for _ in 0..count {
        let mut smp = sampler.proper_sample(op);
        smp.big_y = smp.big_x.clone();
        let low = op.try_evaluate(&smp.x, smp.r, &smp.p, &smp.big_x)?;
        let high = op.try_evaluate(&smp.x, smp.s, &smp.p, &smp.big_x)?;
        scale = scale.max(1.0 + low.abs()).max(1.0 + high.abs());
        rows.push((smp, low, high));
    }
    let tol = PROPER_TOL * scale;
    Ok(rows
        .into_iter()
        .find(|(smp, low, high)| high - low < gamma * (smp.s - smp.r) - tol)
        .map(|(sample, lhs, rhs)| Violation { sample, lhs, rhs }))
}
