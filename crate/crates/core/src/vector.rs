use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};

/// Flat parameter (or momentum) vector.
///
/// Construction and every arithmetic helper reject NaN/infinity, so a
/// `ParamVector` obtained from library operations always holds finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter vector entry {i}")));
        }
        Ok(Self(values))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Squared Euclidean norm.
    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    /// `self + scale * other`, checked for matching dimensions and finite output.
    pub fn add_scaled(&self, other: &ParamVector, scale: f64) -> Result<ParamVector> {
        check_dims(self.dim(), other.dim())?;
        let out: Vec<f64> = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a + scale * b)
            .collect();
        ParamVector::new(out)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(v: ParamVector) -> Self {
        v.0
    }
}
