//! Posterior mass of weight rectangles.
//!
//! For a diagonal Gaussian the mass of a box factorises over dimensions and
//! each factor is a difference of error functions. When both arguments sit in
//! the same tail the difference is taken between complementary error
//! functions instead, which keeps far-out slabs from cancelling to zero.

use libm::{erf, erfc};

use crate::error::{check_dim, Error, Result};
use crate::estimate::McEstimate;
use crate::interval::{Interval, IntervalBox};
use crate::model::{BnnModel, WeightSample};

use super::SafeWeightSet;

/// Diagonal Gaussian over the flattened weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGaussian {
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl DiagonalGaussian {
    pub fn new(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        check_dim("variance vector", mean.len(), var.len())?;
        if let Some(j) = var.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "variance {j} must be finite and non-negative, got {}",
                var[j]
            )));
        }
        Ok(Self { mean, var })
    }

    pub fn from_model(model: &BnnModel) -> Self {
        Self {
            mean: model.mean_vector(),
            var: model.variance_vector(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn var(&self) -> &[f64] {
        &self.var
    }

    /// Mass of `iv` under the `j`-th marginal.
    pub fn interval_mass(&self, j: usize, iv: Interval) -> f64 {
        normal_interval_mass(self.mean[j], self.var[j], iv)
    }

    pub fn box_mass(&self, b: &IntervalBox) -> Result<f64> {
        check_dim("weight box", self.dim(), b.dim())?;
        Ok(b.iter()
            .enumerate()
            .map(|(j, iv)| self.interval_mass(j, *iv))
            .product::<f64>()
            .clamp(0.0, 1.0))
    }

    /// Natural log of the box mass, finite even where the product underflows.
    pub fn log_box_mass(&self, b: &IntervalBox) -> Result<f64> {
        check_dim("weight box", self.dim(), b.dim())?;
        Ok(b.iter()
            .enumerate()
            .map(|(j, iv)| self.interval_mass(j, *iv).ln())
            .sum())
    }
}

/// `P(lo <= X <= hi)` for `X ~ N(mean, var)`; a point mass when `var == 0`.
pub fn normal_interval_mass(mean: f64, var: f64, iv: Interval) -> f64 {
    if var == 0.0 {
        return if iv.contains(mean) { 1.0 } else { 0.0 };
    }
    let s = (2.0 * var).sqrt();
    let a = (mean - iv.lo()) / s;
    let b = (mean - iv.hi()) / s;
    let m = if b > 0.0 {
        0.5 * (erfc(b) - erfc(a))
    } else if a < 0.0 {
        0.5 * (erfc(-a) - erfc(-b))
    } else {
        0.5 * (erf(a) - erf(b))
    };
    m.clamp(0.0, 1.0)
}

/// Posterior mass of `b` under the model's diagonal Gaussian.
pub fn gaussian_box_mass(model: &BnnModel, b: &IntervalBox) -> Result<f64> {
    DiagonalGaussian::from_model(model).box_mass(b)
}

/// Fraction of `samples` that fall inside any rectangle of `set`.
pub fn mc_box_mass(samples: &[WeightSample], set: &SafeWeightSet) -> Result<McEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("sample list is empty".into()));
    }
    let hits = samples
        .iter()
        .filter(|w| set.contains_point(w.values()))
        .count();
    Ok(McEstimate::from_counts(hits, samples.len()))
}
