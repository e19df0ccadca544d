//! Loss functions `l: A x B -> [0,1]` on a closed prediction interval `A`
//! with a finite outcome set `B`.
//!
//! Both built-in losses use `A = [0,1]`, `B = {0,1}`, which keeps values in
//! `[0,1]` and makes the adversary's supremum a maximum over two points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Built-in loss shapes, both convex in the prediction argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `|a - b|`
    Absolute,
    /// `(a - b)^2`
    Squared,
}

/// A loss function together with its prediction interval and outcome set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossFunction<F> {
    kind: LossKind,
    /// Closed prediction interval `A = [lo, hi]`.
    lo: F,
    hi: F,
    /// Finite outcome set `B`, kept sorted ascending (greedy adversaries
    /// break ties toward the smaller outcome).
    outcomes: Vec<F>,
}

impl<F: Real> LossFunction<F> {
    /// Absolute loss on `A = [0,1]`, `B = {0,1}`.
    pub fn absolute() -> Self {
        Self {
            kind: LossKind::Absolute,
            lo: F::zero(),
            hi: F::one(),
            outcomes: vec![F::zero(), F::one()],
        }
    }

    /// Squared loss on `A = [0,1]`, `B = {0,1}`.
    pub fn squared() -> Self {
        Self {
            kind: LossKind::Squared,
            lo: F::zero(),
            hi: F::one(),
            outcomes: vec![F::zero(), F::one()],
        }
    }

    pub fn from_kind(kind: LossKind) -> Self {
        match kind {
            LossKind::Absolute => Self::absolute(),
            LossKind::Squared => Self::squared(),
        }
    }

    /// Custom domain. Rejects intervals or outcome sets on which the loss
    /// leaves `[0,1]` (checked on a 101-point grid of `A` per outcome).
    pub fn with_domain(kind: LossKind, lo: F, hi: F, mut outcomes: Vec<F>) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::Rejected(
                "prediction interval must be finite with lo < hi".into(),
            ));
        }
        if outcomes.is_empty() || outcomes.iter().any(|b| !b.is_finite()) {
            return Err(Error::Rejected(
                "outcome set must be non-empty and finite".into(),
            ));
        }
        outcomes.sort_by(|a, b| a.partial_cmp(b).expect("finite outcomes"));
        outcomes.dedup();
        let candidate = Self {
            kind,
            lo,
            hi,
            outcomes,
        };
        for &b in &candidate.outcomes {
            for a in candidate.prediction_grid(101) {
                let v = candidate.raw(a, b);
                if v < F::zero() || v > F::one() {
                    return Err(Error::Rejected(format!(
                        "loss leaves [0,1] at a={a}, b={b}"
                    )));
                }
            }
        }
        Ok(candidate)
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    /// Lower end of the prediction interval `A`.
    pub fn lo(&self) -> F {
        self.lo
    }

    /// Upper end of the prediction interval `A`.
    pub fn hi(&self) -> F {
        self.hi
    }

    pub fn midpoint(&self) -> F {
        (self.lo + self.hi) * F::half()
    }

    /// Outcome set `B`, ascending.
    pub fn outcomes(&self) -> &[F] {
        &self.outcomes
    }

    pub fn contains_prediction(&self, a: F) -> bool {
        a.is_finite() && a >= self.lo - F::tol_strict() && a <= self.hi + F::tol_strict()
    }

    pub fn contains_outcome(&self, b: F) -> bool {
        self.outcomes.contains(&b)
    }

    /// Evaluate the loss, rejecting predictions outside `A` and outcomes
    /// outside `B`. Predictions within round-off of the interval ends are
    /// clamped so the value never leaves `[0,1]`.
    pub fn evaluate(&self, a: F, b: F) -> Result<F> {
        if !self.contains_prediction(a) {
            return Err(Error::Rejected(format!(
                "prediction {a} outside [{}, {}]",
                self.lo, self.hi
            )));
        }
        if !self.contains_outcome(b) {
            return Err(Error::Rejected(format!("outcome {b} not in outcome set")));
        }
        Ok(self.raw(a.max(self.lo).min(self.hi), b))
    }

    fn raw(&self, a: F, b: F) -> F {
        match self.kind {
            LossKind::Absolute => (a - b).abs(),
            LossKind::Squared => (a - b) * (a - b),
        }
    }

    /// Uniform grid of `points >= 2` predictions covering `A`.
    pub fn prediction_grid(&self, points: usize) -> impl Iterator<Item = F> + '_ {
        let steps = points.max(2) - 1;
        let width = self.hi - self.lo;
        (0..=steps).map(move |i| {
            self.lo + width * F::from_usize(i).unwrap() / F::from_usize(steps).unwrap()
        })
    }
}
