//! Probability weight vectors on the simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point of the probability simplex over `N` experts/actions: entries are
/// nonnegative and sum to one within `tol_strict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector<F> {
    weights: Vec<F>,
}

impl<F: Real> WeightVector<F> {
    pub fn new(weights: Vec<F>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Rejected("weight vector must be non-empty".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < F::zero()) {
            return Err(Error::Rejected(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let sum: F = weights.iter().copied().sum();
        if (sum - F::one()).abs() > F::tol_strict() {
            return Err(Error::Rejected(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Uniform weights `(1/N, ..., 1/N)`.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "need at least one expert");
        let w = F::one() / F::from_usize(n).unwrap();
        Self {
            weights: vec![w; n],
        }
    }

    /// Point mass on coordinate `i`.
    pub fn vertex(n: usize, i: usize) -> Self {
        assert!(i < n, "vertex index out of range");
        let mut weights = vec![F::zero(); n];
        weights[i] = F::one();
        Self { weights }
    }

    /// Normalize a nonnegative vector with positive sum onto the simplex.
    pub fn normalized(raw: &[F]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Rejected("cannot normalize an empty vector".into()));
        }
        if raw.iter().any(|w| !w.is_finite() || *w < F::zero()) {
            return Err(Error::Rejected(
                "normalization needs finite nonnegative entries".into(),
            ));
        }
        let sum: F = raw.iter().copied().sum();
        if sum <= F::real(1e-300) {
            return Err(Error::DegenerateGradient);
        }
        Ok(Self {
            weights: raw.iter().map(|&w| w / sum).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> F {
        self.weights[i]
    }

    /// Inner product with an arbitrary vector of matching dimension.
    pub fn dot(&self, other: &[F]) -> Result<F> {
        if other.len() != self.weights.len() {
            return Err(Error::Rejected(format!(
                "dimension mismatch: {} weights vs {} values",
                self.weights.len(),
                other.len()
            )));
        }
        Ok(self.weights.iter().zip(other).map(|(&w, &v)| w * v).sum())
    }

    pub fn iter(&self) -> impl Iterator<Item = F> + '_ {
        self.weights.iter().copied()
    }
}
