//! Regret algebra: advice vectors, per-round regret increments against each
//! expert, and cumulative regret over a played game.
//!
//! One round produces the increment vector
//! `r_i = l(<p,f>, b) - l(f_i, b)`: what the forecaster's averaged
//! prediction lost minus what expert `i` lost. With losses in `[0,1]` each
//! entry stays in `[-1,1]`, and for convex losses `<p, r> <= 0` (Jensen),
//! which is the inequality the potential strategy leans on every round.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossFunction;
use crate::scalar::{coordinate_max, Real};
use crate::simplex::WeightVector;

/// One prediction per expert, each inside the loss's prediction interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AdviceVector<F> {
    advices: Vec<F>,
}

impl<F: Real> AdviceVector<F> {
    pub fn new(advices: Vec<F>, loss: &LossFunction<F>) -> Result<Self> {
        if advices.is_empty() {
            return Err(Error::Rejected("advice vector must be non-empty".into()));
        }
        for &a in &advices {
            if !loss.contains_prediction(a) {
                return Err(Error::Rejected(format!(
                    "advice {a} outside the prediction interval"
                )));
            }
        }
        Ok(Self { advices })
    }

    pub fn len(&self) -> usize {
        self.advices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.advices.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.advices
    }
}

/// Per-expert scaled regret state; finite entries only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegretVector<F> {
    values: Vec<F>,
}

impl<F: Real> RegretVector<F> {
    pub fn new(values: Vec<F>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Rejected("regret vector must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Rejected("regret entries must be finite".into()));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0);
        Self {
            values: vec![F::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.values
    }

    /// `max_i x_i` — the terminal payoff of the regret game.
    pub fn max_coordinate(&self) -> F {
        coordinate_max(&self.values)
    }

    /// `x + scale * r`, the state recursion step.
    pub fn step(&self, increment: &RegretIncrement<F>, scale: F) -> Self {
        let values = self
            .values
            .iter()
            .zip(increment.as_slice())
            .map(|(&x, &r)| x + r * scale)
            .collect();
        Self { values }
    }
}

/// The per-round regret increment `r(p,f,b)`; entries in `[-1,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegretIncrement<F> {
    values: Vec<F>,
}

impl<F: Real> RegretIncrement<F> {
    pub(crate) fn from_raw(values: Vec<F>) -> Self {
        debug_assert!(values.iter().all(|v| v.abs() <= F::one() + F::tol_strict()));
        Self { values }
    }

    pub fn as_slice(&self) -> &[F] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The weighted-average prediction `<p, f>`; lies in the convex hull of the
/// advice, hence inside the prediction interval.
pub fn combine_advice<F: Real>(p: &WeightVector<F>, f: &AdviceVector<F>) -> Result<F> {
    p.dot(f.as_slice())
}

/// Regret increment of one round: `r_i = l(<p,f>, b) - l(f_i, b)`.
pub fn regret_increment<F: Real>(
    p: &WeightVector<F>,
    f: &AdviceVector<F>,
    b: F,
    loss: &LossFunction<F>,
) -> Result<RegretIncrement<F>> {
    let prediction = combine_advice(p, f)?;
    let forecaster_loss = loss.evaluate(prediction, b)?;
    let values = f
        .as_slice()
        .iter()
        .map(|&fi| loss.evaluate(fi, b).map(|li| forecaster_loss - li))
        .collect::<Result<Vec<F>>>()?;
    Ok(RegretIncrement::from_raw(values))
}

/// Cumulative regret of a finished game: the forecaster's total loss minus
/// the best single expert's, ties broken toward the lowest index (the value
/// is tie-independent). `expert_losses[t][i]` is expert `i`'s loss in round
/// `t`. Empty games have zero regret.
pub fn cumulative_regret<F: Real>(forecaster_losses: &[F], expert_losses: &[Vec<F>]) -> F {
    assert_eq!(
        forecaster_losses.len(),
        expert_losses.len(),
        "one expert-loss row per round"
    );
    if forecaster_losses.is_empty() {
        return F::zero();
    }
    let n_experts = expert_losses[0].len();
    let mut totals = vec![F::zero(); n_experts];
    for row in expert_losses {
        assert_eq!(row.len(), n_experts, "ragged expert-loss rows");
        for (t, &l) in totals.iter_mut().zip(row) {
            *t += l;
        }
    }
    // fold keeps the first (lowest-index) minimum
    let best = totals
        .iter()
        .copied()
        .fold(F::infinity(), |acc, l| if l < acc { l } else { acc });
    forecaster_losses.iter().copied().sum::<F>() - best
}
