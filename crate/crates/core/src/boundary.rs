//! Per-face boundary conditions and the boundary operator `B(x, r, p)`.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::grid::{Face, Grid};
use crate::operators::{ScalarField, VectorField};

/// Whether the condition is imposed pointwise or in the relaxed sense where
/// either the equation or the condition may hold at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Strong,
    Viscosity,
}

#[derive(Clone)]
pub enum FaceCondition {
    /// `B = r - f(x)`.
    Dirichlet { f: ScalarField },
    /// `B = <ν(x), p> - f(x)` with `<ν, n> >= nu0 > 0` on the face.
    Oblique {
        nu: VectorField,
        f: ScalarField,
        nu0: f64,
    },
    /// Supersolution inequality up to the boundary; no data.
    StateConstraint,
}

impl std::fmt::Debug for FaceCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FaceCondition::Dirichlet { .. } => write!(f, "Dirichlet"),
            FaceCondition::Oblique { nu0, .. } => write!(f, "Oblique(nu0={nu0})"),
            FaceCondition::StateConstraint => write!(f, "StateConstraint"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FaceBc {
    pub condition: FaceCondition,
    pub sense: Sense,
}

impl FaceBc {
    pub fn dirichlet(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, sense: Sense) -> Self {
        Self {
            condition: FaceCondition::Dirichlet { f: Arc::new(f) },
            sense,
        }
    }

    pub fn zero_dirichlet(sense: Sense) -> Self {
        Self::dirichlet(|_| 0.0, sense)
    }

    /// Neumann condition `<n, Du> = f` on the face with outward normal `n`.
    pub fn neumann(face: Face, dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, sense: Sense) -> Self {
        let n = face.normal(dim);
        Self {
            condition: FaceCondition::Oblique {
                nu: Arc::new(move |_| n.clone()),
                f: Arc::new(f),
                nu0: 1.0,
            },
            sense,
        }
    }

    pub fn state_constraint() -> Self {
        Self {
            condition: FaceCondition::StateConstraint,
            sense: Sense::Viscosity,
        }
    }

    /// `B(x, r, p)`; `None` for state constraints.
    pub fn evaluate(&self, x: &[f64], r: f64, p: &[f64]) -> Option<f64> {
        match &self.condition {
            FaceCondition::Dirichlet { f } => Some(r - f(x)),
            FaceCondition::Oblique { nu, f, .. } => {
                let v = nu(x);
                let mut s = 0.0;
                for k in 0..p.len() {
                    s += v[k] * p[k];
                }
                Some(s - f(x))
            }
            FaceCondition::StateConstraint => None,
        }
    }
}

/// One condition per face, indexed by `2 * axis + upper`.
#[derive(Clone, Debug)]
pub struct BoundarySpec {
    dim: usize,
    faces: Vec<FaceBc>,
}

impl BoundarySpec {
    pub fn uniform(dim: usize, bc: FaceBc) -> Self {
        Self {
            dim,
            faces: vec![bc; 2 * dim],
        }
    }

    pub fn dirichlet(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, sense: Sense) -> Self {
        Self::uniform(dim, FaceBc::dirichlet(f, sense))
    }

    /// Homogeneous Neumann on every face.
    pub fn neumann(dim: usize, sense: Sense) -> Self {
        let faces = (0..dim)
            .flat_map(|axis| {
                [false, true].map(|upper| FaceBc::neumann(Face { axis, upper }, dim, |_| 0.0, sense))
            })
            .collect();
        Self { dim, faces }
    }

    pub fn with_face(mut self, face: Face, bc: FaceBc) -> Self {
        self.faces[2 * face.axis + face.upper as usize] = bc;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn face(&self, face: Face) -> &FaceBc {
        &self.faces[2 * face.axis + face.upper as usize]
    }

    /// The condition governing a boundary node: the first of its faces in
    /// axis order, lower before upper.
    pub fn governing(&self, grid: &Grid, idx: usize) -> Option<(Face, &FaceBc)> {
        grid.faces_of(idx).into_iter().next().map(|f| (f, self.face(f)))
    }

    /// Checks the data on every boundary node of `grid`: Dirichlet values
    /// finite and oblique fields uniformly transversal.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.dim {
            return invalid(format!(
                "boundary spec has dimension {} but the grid has {}",
                self.dim,
                grid.dim()
            ));
        }
        let mut x = vec![0.0; grid.dim()];
        for idx in 0..grid.len() {
            for face in grid.faces_of(idx) {
                grid.point_into(idx, &mut x);
                match &self.face(face).condition {
                    FaceCondition::Dirichlet { f } => {
                        if !f(&x).is_finite() {
                            return invalid(format!("Dirichlet data is not finite at {x:?}"));
                        }
                    }
                    FaceCondition::Oblique { nu, f, nu0 } => {
                        if !(*nu0 > 0.0) {
                            return invalid("oblique condition needs nu0 > 0");
                        }
                        let v = nu(&x);
                        if v.len() != self.dim {
                            return invalid("oblique field has the wrong length");
                        }
                        let n = face.normal(self.dim);
                        let dot: f64 = v.iter().zip(&n).map(|(a, b)| a * b).sum();
                        if dot < *nu0 {
                            return invalid(format!("<nu, n> = {dot} < {nu0} at {x:?}"));
                        }
                        if !f(&x).is_finite() {
                            return invalid(format!("oblique data is not finite at {x:?}"));
                        }
                    }
                    FaceCondition::StateConstraint => {}
                }
            }
        }
        Ok(())
    }
}
