use std::sync::Arc;

use nalgebra::DVector;

use super::{Determinant, DeterminantBasis};
use crate::error::{Error, Result};

/// Real wave function expanded over a determinant sector.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<DeterminantBasis>,
    coefficients: DVector<f64>,
}

impl StateVector {
    pub fn new(basis: Arc<DeterminantBasis>, coefficients: DVector<f64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: coefficients.len(),
            });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("state coefficients must be finite".into()));
        }
        Ok(Self { basis, coefficients })
    }

    pub fn zeros(basis: Arc<DeterminantBasis>) -> Self {
        let n = basis.len();
        Self {
            basis,
            coefficients: DVector::zeros(n),
        }
    }

    /// Single-determinant state.
    pub fn from_determinant(basis: Arc<DeterminantBasis>, det: Determinant) -> Result<Self> {
        let idx = basis
            .index_of(det)
            .ok_or_else(|| Error::Domain(format!("{det:?} is not in the sector")))?;
        let mut out = Self::zeros(basis);
        out.coefficients[idx] = 1.0;
        Ok(out)
    }

    pub fn basis(&self) -> &Arc<DeterminantBasis> {
        &self.basis
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut DVector<f64> {
        &mut self.coefficients
    }

    pub fn into_coefficients(self) -> DVector<f64> {
        self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.norm()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.coefficients.dot(&other.coefficients)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroState);
        }
        Ok(Self {
            basis: self.basis.clone(),
            coefficients: &self.coefficients / n,
        })
    }

    pub fn same_sector(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }
}
