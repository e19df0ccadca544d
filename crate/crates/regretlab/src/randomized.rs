//! Randomized prediction over a finite action set.
//!
//! Here the forecaster samples one of `N` fixed actions from a distribution
//! instead of averaging advice, and competes with the best fixed action.
//! The regret state evolves by the *expected* increment
//! `r_i(p,b) = sum_j p_j l(y_j,b) - l(y_i,b)`, for which `<p, r(p,b)> = 0`
//! identically — so the gradient-normalized distribution satisfies the
//! Blackwell condition with no convexity assumption on the loss, and the
//! potential bound applies to the expected regret for arbitrary outcome
//! sequences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossFunction;
use crate::potential::Potential;
use crate::regret::RegretVector;
use crate::rng::SeedStream;
use crate::scalar::Real;
use crate::simplex::WeightVector;

/// Fixed actions with their losses tabulated over the finite outcome set.
///
/// Only the values `l(y_i, b)` ever matter in this setting, so the loss is
/// stored as a table; that also admits non-convex losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSet<F> {
    actions: Vec<F>,
    outcomes: Vec<F>,
    /// `table[i][k] = l(actions[i], outcomes[k])`, entries in `[0,1]`.
    table: Vec<Vec<F>>,
}

impl<F: Real> ActionSet<F> {
    /// Tabulate a pointwise loss over the given actions.
    pub fn from_loss(actions: Vec<F>, loss: &LossFunction<F>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::Rejected("need at least one action".into()));
        }
        let outcomes = loss.outcomes().to_vec();
        let table = actions
            .iter()
            .map(|&y| outcomes.iter().map(|&b| loss.evaluate(y, b)).collect())
            .collect::<Result<Vec<Vec<F>>>>()?;
        Ok(Self {
            actions,
            outcomes,
            table,
        })
    }

    /// Raw loss table; outcomes must be strictly ascending and entries in
    /// `[0,1]`.
    pub fn from_table(actions: Vec<F>, outcomes: Vec<F>, table: Vec<Vec<F>>) -> Result<Self> {
        if actions.is_empty() || outcomes.is_empty() {
            return Err(Error::Rejected(
                "actions and outcomes must be non-empty".into(),
            ));
        }
        if !outcomes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Rejected(
                "outcomes must be strictly ascending".into(),
            ));
        }
        if table.len() != actions.len() || table.iter().any(|row| row.len() != outcomes.len()) {
            return Err(Error::Rejected(
                "loss table must be actions x outcomes".into(),
            ));
        }
        for row in &table {
            for &v in row {
                if !(v.is_finite() && v >= F::zero() && v <= F::one()) {
                    return Err(Error::Rejected("loss values must lie in [0,1]".into()));
                }
            }
        }
        Ok(Self {
            actions,
            outcomes,
            table,
        })
    }

    /// Three actions whose loss bulges in the middle — convex in no outcome.
    /// A fixture for exercising the no-convexity-needed expected-regret
    /// bound.
    pub fn non_convex_demo() -> Self {
        Self::from_table(
            vec![F::zero(), F::half(), F::one()],
            vec![F::zero(), F::one()],
            vec![
                vec![F::real(0.05), F::real(0.95)],
                vec![F::real(0.9), F::real(0.9)],
                vec![F::real(0.95), F::real(0.05)],
            ],
        )
        .expect("fixture table is valid")
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[F] {
        &self.actions
    }

    pub fn outcomes(&self) -> &[F] {
        &self.outcomes
    }

    pub fn outcome_index(&self, b: F) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|&o| o == b)
            .ok_or_else(|| Error::Rejected(format!("outcome {b} not in outcome set")))
    }

    /// `l(y_i, b)` by indices.
    pub fn loss_at(&self, action: usize, outcome: usize) -> F {
        self.table[action][outcome]
    }

    /// `sum_j p_j l(y_j, b)`.
    pub fn expected_loss(&self, p: &WeightVector<F>, outcome: usize) -> F {
        self.table
            .iter()
            .zip(p.iter())
            .map(|(row, pj)| pj * row[outcome])
            .sum()
    }
}

/// Expected regret increment `r_i(p,b) = sum_j p_j l(y_j,b) - l(y_i,b)`.
pub fn randomized_increment<F: Real>(
    p: &WeightVector<F>,
    b: F,
    actions: &ActionSet<F>,
) -> Result<Vec<F>> {
    if p.len() != actions.len() {
        return Err(Error::Rejected(format!(
            "{} weights for {} actions",
            p.len(),
            actions.len()
        )));
    }
    let k = actions.outcome_index(b)?;
    let expected = actions.expected_loss(p, k);
    Ok((0..actions.len())
        .map(|i| expected - actions.loss_at(i, k))
        .collect())
}

/// One sampled round.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedRound<F> {
    pub round: usize,
    pub distribution: WeightVector<F>,
    /// Index of the sampled action (0-based).
    pub sampled_action: usize,
    pub outcome: F,
    pub expected_increment: Vec<F>,
    pub sampled_loss: F,
}

/// Randomized forecaster state; the regret recursion runs on expected
/// increments, so the distribution path is deterministic given the outcome
/// sequence and sampling only affects the realized losses.
#[derive(Debug, Clone)]
pub struct RandomizedState<F> {
    x: RegretVector<F>,
    round: usize,
    horizon: usize,
    potential: Potential<F>,
    actions: ActionSet<F>,
}

impl<F: Real> RandomizedState<F> {
    pub fn new(horizon: usize, potential: Potential<F>, actions: ActionSet<F>) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Rejected("horizon must be at least 1".into()));
        }
        Ok(Self {
            x: RegretVector::zeros(actions.len()),
            round: 0,
            horizon,
            potential,
            actions,
        })
    }

    pub fn regrets(&self) -> &RegretVector<F> {
        &self.x
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn actions(&self) -> &ActionSet<F> {
        &self.actions
    }

    pub fn potential(&self) -> &Potential<F> {
        &self.potential
    }

    pub fn regret_bound(&self) -> F {
        self.potential.bound_constant(self.actions.len())
            * F::from_usize(self.horizon).unwrap().sqrt()
    }

    /// Current action distribution: the normalized potential gradient, or
    /// uniform if the gradient vanishes.
    pub fn distribution(&self) -> Result<WeightVector<F>> {
        self.potential.weights_or_uniform(self.x.as_slice())
    }

    /// Observe an outcome: update the state by the expected increment and
    /// draw one action from the distribution.
    pub fn step(&self, outcome: F, rng: &mut SeedStream) -> Result<(Self, RandomizedRound<F>)> {
        if self.round >= self.horizon {
            return Err(Error::Sequencing(format!(
                "horizon {} exhausted",
                self.horizon
            )));
        }
        let distribution = self.distribution()?;
        let increment = randomized_increment(&distribution, outcome, &self.actions)?;

        // <grad, r> vanishes identically for the gradient-normalized
        // distribution; anything bigger than round-off is a broken potential
        let gradient = self.potential.gradient(self.x.as_slice());
        let blackwell: F = gradient.iter().zip(&increment).map(|(&g, &r)| g * r).sum();
        if blackwell.abs() > F::tol_strict() {
            return Err(Error::InvariantViolation {
                round: self.round,
                check: "blackwell",
                value: blackwell.to_f64().unwrap_or(f64::NAN),
            });
        }

        let k = self.actions.outcome_index(outcome)?;
        let sampled_action = rng.sample_index(distribution.as_slice());
        let sampled_loss = self.actions.loss_at(sampled_action, k);

        let scale = F::from_usize(self.horizon).unwrap().sqrt().recip();
        let next_values: Vec<F> = self
            .x
            .as_slice()
            .iter()
            .zip(&increment)
            .map(|(&xi, &r)| xi + r * scale)
            .collect();

        let mut next = self.clone();
        next.x = RegretVector::new(next_values)?;
        next.round += 1;

        let record = RandomizedRound {
            round: self.round,
            distribution,
            sampled_action,
            outcome,
            expected_increment: increment,
            sampled_loss,
        };
        Ok((next, record))
    }
}

/// Play out a full oblivious outcome stream.
pub fn run_randomized<F: Real>(
    mut state: RandomizedState<F>,
    outcomes: &[F],
    rng: &mut SeedStream,
) -> Result<(Vec<RandomizedRound<F>>, RandomizedState<F>)> {
    if outcomes.len() != state.horizon - state.round {
        return Err(Error::Sequencing(format!(
            "stream covers {} rounds, {} remain",
            outcomes.len(),
            state.horizon - state.round
        )));
    }
    let mut rounds = Vec::with_capacity(outcomes.len());
    for &b in outcomes {
        let (next, record) = state.step(b, rng)?;
        state = next;
        rounds.push(record);
    }
    Ok((rounds, state))
}

/// Distribution-weighted cumulative loss minus the best fixed action's.
pub fn expected_regret<F: Real>(rounds: &[RandomizedRound<F>], actions: &ActionSet<F>) -> F {
    regret_with(rounds, actions, |round, k| {
        actions.expected_loss(&round.distribution, k)
    })
}

/// Realized sampled cumulative loss minus the best fixed action's.
pub fn sampled_regret<F: Real>(rounds: &[RandomizedRound<F>], actions: &ActionSet<F>) -> F {
    regret_with(rounds, actions, |round, _| round.sampled_loss)
}

fn regret_with<F: Real>(
    rounds: &[RandomizedRound<F>],
    actions: &ActionSet<F>,
    forecaster_loss: impl Fn(&RandomizedRound<F>, usize) -> F,
) -> F {
    if rounds.is_empty() {
        return F::zero();
    }
    let mut own = F::zero();
    let mut fixed = vec![F::zero(); actions.len()];
    for round in rounds {
        let k = actions
            .outcome_index(round.outcome)
            .expect("transcript outcome in outcome set");
        own += forecaster_loss(round, k);
        for (acc, i) in fixed.iter_mut().zip(0..) {
            *acc += actions.loss_at(i, k);
        }
    }
    let best = fixed
        .iter()
        .copied()
        .fold(F::infinity(), |acc, l| if l < acc { l } else { acc });
    own - best
}
