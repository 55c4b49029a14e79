//! Uniform rectilinear grids and node-indexed functions.

use std::sync::Arc;

use crate::error::{invalid, Error, Result};

/// A uniform grid over the box `[lo, hi]` with `n[i] >= 2` nodes per axis.
///
/// Nodes are numbered row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
    h: Vec<f64>,
    strides: Vec<usize>,
}

/// A face of the bounding box: `axis` and `upper == true` for the `hi` side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Face {
    pub axis: usize,
    pub upper: bool,
}

impl Face {
    /// Outward unit normal of the face.
    pub fn normal(&self, dim: usize) -> Vec<f64> {
        let mut n = vec![0.0; dim];
        n[self.axis] = if self.upper { 1.0 } else { -1.0 };
        n
    }
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, n: Vec<usize>) -> Result<Self> {
        let dim = lo.len();
        if dim == 0 || hi.len() != dim || n.len() != dim {
            return invalid("grid corners and node counts must share a positive dimension");
        }
        for i in 0..dim {
            if !(lo[i].is_finite() && hi[i].is_finite() && lo[i] < hi[i]) {
                return invalid(format!("axis {i}: need finite lo < hi"));
            }
            if n[i] < 2 {
                return invalid(format!("axis {i}: need at least 2 nodes"));
            }
        }
        let h = (0..dim).map(|i| (hi[i] - lo[i]) / (n[i] - 1) as f64).collect();
        let mut strides = vec![1; dim];
        for i in (0..dim.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * n[i + 1];
        }
        Ok(Self {
            lo,
            hi,
            n,
            h,
            strides,
        })
    }

    /// Same node count and interval on every axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], vec![n; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn max_h(&self) -> f64 {
        self.h.iter().fold(0.0, |m, v| m.max(*v))
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `k` on `axis`.
    ///
    /// Nodes in the lower half are measured from `lo`, nodes in the upper half
    /// from `hi`, and an exact centre node sits at the midpoint. On a box that
    /// is symmetric about the origin this makes the coordinates exactly
    /// antisymmetric, which symmetric stencils rely on.
    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        let last = self.n[axis] - 1;
        let (lo, hi, h) = (self.lo[axis], self.hi[axis], self.h[axis]);
        if 2 * k == last {
            0.5 * (lo + hi)
        } else if 2 * k < last {
            if k == 0 {
                lo
            } else {
                lo + k as f64 * h
            }
        } else if k == last {
            hi
        } else {
            hi - (last - k) as f64 * h
        }
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        self.multi_index_into(idx, &mut out);
        out
    }

    pub fn multi_index_into(&self, mut idx: usize, out: &mut [usize]) {
        for (axis, s) in self.strides.iter().enumerate() {
            out[axis] = idx / s;
            idx %= s;
        }
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(k, s)| k * s).sum()
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        self.point_into(idx, &mut p);
        p
    }

    pub fn point_into(&self, mut idx: usize, out: &mut [f64]) {
        for axis in 0..self.dim() {
            let k = idx / self.strides[axis];
            idx %= self.strides[axis];
            out[axis] = self.coord(axis, k);
        }
    }

    /// Component `axis` of the multi-index of `idx`.
    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.n[axis]
    }

    /// Neighbour `step` nodes along `axis`, if inside the grid.
    pub fn shift(&self, idx: usize, axis: usize, step: isize) -> Option<usize> {
        let k = self.axis_index(idx, axis) as isize + step;
        if k < 0 || k >= self.n[axis] as isize {
            None
        } else {
            Some((idx as isize + step * self.strides[axis] as isize) as usize)
        }
    }

    /// Node displaced by the integer vector `offset`, if inside the grid.
    pub fn offset(&self, idx: usize, offset: &[isize]) -> Option<usize> {
        let mut out = idx as isize;
        for axis in 0..self.dim() {
            let k = self.axis_index(idx, axis) as isize + offset[axis];
            if k < 0 || k >= self.n[axis] as isize {
                return None;
            }
            out += offset[axis] * self.strides[axis] as isize;
        }
        Some(out as usize)
    }

    /// Faces of the box that contain node `idx`.
    pub fn faces_of(&self, idx: usize) -> Vec<Face> {
        let mut faces = Vec::new();
        for axis in 0..self.dim() {
            let k = self.axis_index(idx, axis);
            if k == 0 {
                faces.push(Face { axis, upper: false });
            }
            if k + 1 == self.n[axis] {
                faces.push(Face { axis, upper: true });
            }
        }
        faces
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        (0..self.dim()).any(|axis| {
            let k = self.axis_index(idx, axis);
            k == 0 || k + 1 == self.n[axis]
        })
    }

    /// Euclidean distance between two nodes computed from index differences.
    pub fn node_distance_sq(&self, a: usize, b: usize) -> f64 {
        let mut d2 = 0.0;
        for axis in 0..self.dim() {
            let ka = self.axis_index(a, axis) as f64;
            let kb = self.axis_index(b, axis) as f64;
            let d = (ka - kb) * self.h[axis];
            d2 += d * d;
        }
        d2
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self == other
    }

    /// Index of the node nearest to `x` (clamped into the box).
    pub fn nearest(&self, x: &[f64]) -> usize {
        let multi: Vec<usize> = (0..self.dim())
            .map(|a| {
                let t = ((x[a] - self.lo[a]) / self.h[a]).round();
                t.clamp(0.0, (self.n[a] - 1) as f64) as usize
            })
            .collect();
        self.index(&multi)
    }
}

/// Values attached to the nodes of a grid.
///
/// Values must be finite unless the function is flagged `extended`, in which
/// case `-∞` is also admitted (never `+∞` or NaN).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    grid: Arc<Grid>,
    values: Vec<f64>,
    extended: bool,
}

impl GridFn {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        Self::build(grid, values, false)
    }

    /// Admits `-∞` values.
    pub fn new_extended(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        Self::build(grid, values, true)
    }

    fn build(grid: Arc<Grid>, values: Vec<f64>, extended: bool) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension {
                expected: grid.len(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            let ok = v.is_finite() || (extended && *v == f64::NEG_INFINITY);
            if !ok {
                return invalid(format!("value {v} at node {i} is not admissible"));
            }
        }
        Ok(Self {
            grid,
            values,
            extended,
        })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.point_into(i, &mut x);
                f(&x)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Nodewise negation. Extended functions cannot be negated (`+∞` would
    /// appear), so the flag is dropped and an error is returned if needed.
    pub fn neg(&self) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| -v).collect())
    }

    /// Replaces the values, keeping the grid and flag.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::build(self.grid.clone(), values, self.extended)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|v| f(*v)).collect())
    }

    /// `max |self - other|` over nodes.
    pub fn sup_distance(&self, other: &GridFn) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn leq(&self, other: &GridFn) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }
}
