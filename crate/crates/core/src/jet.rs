//! Second-order jets `(p, X)` and their parabolic counterparts `(a, p, X)`.

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub p: Vec<f64>,
    pub x: SymMatrix,
}

impl Jet {
    pub fn new(p: Vec<f64>, x: SymMatrix) -> Result<Self> {
        if p.len() != x.dim() {
            return Err(Error::Dimension {
                expected: x.dim(),
                got: p.len(),
            });
        }
        Ok(Self { p, x })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            p: vec![0.0; dim],
            x: SymMatrix::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn neg(&self) -> Self {
        Self {
            p: self.p.iter().map(|v| -v).collect(),
            x: -&self.x,
        }
    }

    /// Midpoint of two jets.
    pub fn midpoint(&self, other: &Jet) -> Self {
        Self {
            p: self
                .p
                .iter()
                .zip(&other.p)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
            x: (&self.x + &other.x).scale(0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicJet {
    pub a: f64,
    pub p: Vec<f64>,
    pub x: SymMatrix,
}

impl ParabolicJet {
    pub fn new(a: f64, p: Vec<f64>, x: SymMatrix) -> Result<Self> {
        let jet = Jet::new(p, x)?;
        Ok(Self {
            a,
            p: jet.p,
            x: jet.x,
        })
    }

    pub fn spatial(&self) -> Jet {
        Jet {
            p: self.p.clone(),
            x: self.x.clone(),
        }
    }
}
