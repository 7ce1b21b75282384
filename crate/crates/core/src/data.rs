//! Row-major observation matrices.

use crate::error::{DpmError, Result};

/// An ordered set of `n` observations in `dim` dimensions, with optional
/// integer labels (ground truth classes, generating components, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
    labels: Option<Vec<i64>>,
}

impl Dataset {
    /// Builds a dataset from row-major values. `values.len()` must be a
    /// multiple of `dim`.
    pub fn from_rows(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(DpmError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if values.len() % dim != 0 {
            return Err(DpmError::LengthMismatch {
                left: values.len(),
                right: dim,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DpmError::NonFiniteObservation);
        }
        Ok(Self {
            dim,
            values,
            labels: None,
        })
    }

    /// Univariate dataset.
    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        Self::from_rows(1, values)
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(DpmError::LengthMismatch {
                left: labels.len(),
                right: self.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Returns a copy with rows reordered so that row `k` of the result is
    /// row `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for &i in perm {
            values.extend_from_slice(self.row(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| perm.iter().map(|&i| l[i]).collect());
        Self {
            dim: self.dim,
            values,
            labels,
        }
    }
}
