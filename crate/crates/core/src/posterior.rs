use crate::error::{Error, Result};

/// Tolerance on the sum of a posterior vector.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A probability vector over `C` classes for a single datum.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPosterior(Vec<f64>);

impl ClassPosterior {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidPosterior(format!(
                "{} classes, need at least 2",
                probs.len()
            )));
        }
        if let Some(p) = probs
            .iter()
            .find(|p| !p.is_finite() || **p < -SUM_TOLERANCE || **p > 1.0 + SUM_TOLERANCE)
        {
            return Err(Error::InvalidPosterior(format!("entry {p} outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidPosterior(format!("entries sum to {sum}")));
        }
        Ok(Self(probs))
    }

    /// Wraps a vector the caller has already normalised.
    pub(crate) fn from_normalised(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= SUM_TOLERANCE);
        Self(probs)
    }

    pub fn uniform(num_classes: usize) -> Self {
        Self(vec![1.0 / num_classes as f64; num_classes])
    }

    /// Normalises non-negative weights. Returns `None` when they sum to zero.
    pub fn from_weights(weights: &[f64]) -> Option<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return None;
        }
        Some(Self(weights.iter().map(|w| w / total).collect()))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn num_classes(&self) -> usize {
        self.0.len()
    }

    /// Most probable class; ties go to the lower index.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }

    pub fn max_prob(&self) -> f64 {
        self.0[self.argmax()]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ClassPosterior {
    type Output = f64;

    fn index(&self, class: usize) -> &f64 {
        &self.0[class]
    }
}

/// Index of the largest value, first one on ties.
pub(crate) fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
