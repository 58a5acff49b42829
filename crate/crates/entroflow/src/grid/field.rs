use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Domain;

/// A cell-centered real-valued grid function.
#[derive(Clone, Debug)]
pub struct Field {
    domain: Arc<Domain>,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(domain: Arc<Domain>) -> Self {
        let n = domain.num_cells();
        Field {
            domain,
            data: vec![0.0; n],
        }
    }

    pub fn from_fn(domain: Arc<Domain>, f: impl Fn(&[f64]) -> f64) -> Self {
        let data = (0..domain.num_cells())
            .map(|i| {
                let x = domain.cell_center(i);
                f(&x[..domain.dim()])
            })
            .collect();
        Field { domain, data }
    }

    pub fn from_vec(domain: Arc<Domain>, data: Vec<f64>) -> Result<Self> {
        if data.len() != domain.num_cells() {
            return Err(Error::DimensionMismatch);
        }
        Ok(Field { domain, data })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            domain: self.domain.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_same_domain(other)?;
        Ok(Field {
            domain: self.domain.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn check_same_domain(&self, other: &Field) -> Result<()> {
        if **self.domain() != **other.domain() {
            return Err(Error::DimensionMismatch);
        }
        Ok(())
    }

    /// Errors unless every cell is strictly positive.
    pub fn check_positive(&self) -> Result<()> {
        for (i, &v) in self.data.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::NegativeCell { index: i, value: v });
            }
        }
        Ok(())
    }
}
