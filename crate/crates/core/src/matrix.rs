//! Dense symmetric matrices with the Loewner order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Result};

/// Eigenvalue slack used by the order test, per unit of dimension.
pub const ORDER_TOL: f64 = 1e-12;

/// A real symmetric `dim x dim` matrix stored row-major.
///
/// Symmetry is exact: every constructor either checks it or mirrors the upper
/// triangle, so `get(i, j) == get(j, i)` bitwise.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds from row-major entries; rejects asymmetric or non-square input.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return invalid("matrix dimension must be positive");
        }
        if entries.len() != dim * dim {
            return invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            ));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return invalid(format!("entries ({i},{j}) and ({j},{i}) differ"));
                }
            }
        }
        Ok(Self { dim, data: entries })
    }

    /// Builds from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return invalid("rows must form a square matrix");
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    /// Builds by evaluating `f(i, j)` on the upper triangle and mirroring.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_upper(dim, |_, _| 0.0)
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1.0)
    }

    pub fn scalar(dim: usize, s: f64) -> Self {
        Self::from_upper(dim, |i, j| if i == j { s } else { 0.0 })
    }

    pub fn diag(d: &[f64]) -> Self {
        Self::from_upper(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    /// The rank-one matrix `v vᵀ`.
    pub fn outer(v: &[f64]) -> Self {
        Self::from_upper(v.len(), |i, j| v[i] * v[j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets entries `(i, j)` and `(j, i)` together.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `⟨X v, v⟩`, accumulated row by row.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        let mut acc = 0.0;
        for i in 0..self.dim {
            let mut row = 0.0;
            for j in 0..self.dim {
                row += self.get(i, j) * v[j];
            }
            acc += row * v[i];
        }
        acc
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// `trace(self * other)` for symmetric operands.
    pub fn frobenius_dot(&self, other: &SymMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Eigenvalues in ascending order. Non-finite entries yield `None`.
    pub fn eigenvalues(&self) -> Option<Vec<f64>> {
        if !self.is_finite() {
            return None;
        }
        let mut ev = match self.dim {
            1 => vec![self.data[0]],
            _ => {
                let m = DMatrix::from_row_slice(self.dim, self.dim, &self.data);
                SymmetricEigen::new(m).eigenvalues.iter().copied().collect()
            }
        };
        ev.sort_by(|a, b| a.total_cmp(b));
        Some(ev)
    }

    /// Eigen-decomposition `(values, vectors)`; column `k` of `vectors`
    /// (stored row-major) pairs with `values[k]`, values ascending.
    pub fn eigen(&self) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
        if !self.is_finite() {
            return None;
        }
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.data);
        let se = SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
        let vectors = order
            .iter()
            .map(|&k| se.eigenvectors.column(k).iter().copied().collect())
            .collect();
        Some((values, vectors))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().map(|e| e[0]).unwrap_or(f64::NAN)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .map(|e| e[e.len() - 1])
            .unwrap_or(f64::NAN)
    }

    /// Spectral norm `max |λ_i|`.
    pub fn norm(&self) -> f64 {
        self.eigenvalues()
            .map(|e| e.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
            .unwrap_or(f64::NAN)
    }

    /// Loewner order `self ⪯ other`: the smallest eigenvalue of
    /// `other - self` is at least `-1e-12 * dim`.
    pub fn leq(&self, other: &SymMatrix) -> bool {
        assert_eq!(self.dim, other.dim, "order test needs equal dimensions");
        (other - self).min_eigenvalue() >= -ORDER_TOL * self.dim as f64
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Block matrix `[[a, b], [b, c]]` of twice the dimension.
    pub fn block(a: &SymMatrix, b: &SymMatrix, c: &SymMatrix) -> SymMatrix {
        let n = a.dim;
        SymMatrix::from_upper(2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a.get(i, j),
            (true, false) => b.get(i, j - n),
            (false, false) => c.get(i - n, j - n),
            (false, true) => unreachable!("upper triangle only"),
        })
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.data.chunks(self.dim).collect();
        f.debug_struct("SymMatrix").field("rows", &rows).finish()
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, rhs.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim, rhs.dim);
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, s: f64) -> SymMatrix {
        self.scale(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetric() {
        assert!(SymMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(SymMatrix::new(2, vec![1.0, 2.0, 2.0]).is_err());
    }

    #[test]
    fn eigenvalues_sorted_and_norm() {
        let m = SymMatrix::diag(&[5.0, -7.0, 2.0]);
        assert_eq!(m.eigenvalues().unwrap(), vec![-7.0, 2.0, 5.0]);
        assert_eq!(m.norm(), 7.0);
    }

    #[test]
    fn order_examples() {
        let a = SymMatrix::identity(2);
        let b = SymMatrix::scalar(2, 2.0);
        assert!(a.leq(&b));
        assert!(!b.leq(&a));
        let c = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(SymMatrix::zeros(2).leq(&c));
        assert!(!c.leq(&SymMatrix::identity(2)));
    }

    #[test]
    fn quad_form_matches_definition() {
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        assert_eq!(m.quad_form(&[1.0, -1.0]), 2.0 - 2.0 + 3.0);
    }
}
