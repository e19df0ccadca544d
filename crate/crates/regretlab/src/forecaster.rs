//! The potential-based weighted-average forecaster.
//!
//! The state is the vector of scaled per-expert regrets, updated by
//! `x <- x + r / sqrt(n)` each round from zero. Weights are the normalized
//! potential gradient at the current state, the prediction is the weighted
//! average of the advice, and each round two inequalities are checked and
//! recorded:
//!
//! - Blackwell: `<grad phi(x), r> <= 0` — holds for convex losses because
//!   the gradient-normalized weights make the comparison a Jensen gap;
//! - telescoping: `-c/n + phi(x') - phi(x) <= 0` — the per-round decrement
//!   of the certificate `c (1 - t/n) + phi(x)`, whose terminal value caps
//!   the regret at `(c + phi(0)) sqrt(n)`.
//!
//! A violation beyond `tol_strict` means a non-convex loss or a broken
//! potential certificate, so the round aborts with a diagnostic instead of
//! silently producing an unsound transcript.

use crate::error::{Error, Result};
use crate::loss::LossFunction;
use crate::potential::{softmax_scaled, Potential};
use crate::regret::{
    combine_advice, regret_increment, AdviceVector, RegretIncrement, RegretVector,
};
use crate::scalar::Real;
use crate::simplex::WeightVector;

/// Forecaster state after `round` of `horizon` rounds.
///
/// Values are immutable; [`ForecasterState::observe`] returns the successor
/// state. Cumulative losses ride along so the gradient weights can be
/// cross-checked against their cumulative-loss softmax form.
#[derive(Debug, Clone)]
pub struct ForecasterState<F> {
    x: RegretVector<F>,
    round: usize,
    horizon: usize,
    potential: Potential<F>,
    loss: LossFunction<F>,
    expert_cum_loss: Vec<F>,
    forecaster_cum_loss: F,
}

/// Everything one round produced, including the two audited inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord<F> {
    pub round: usize,
    pub advice: AdviceVector<F>,
    pub weights: WeightVector<F>,
    pub prediction: F,
    pub outcome: F,
    pub increments: RegretIncrement<F>,
    /// `<grad phi(x_t), r_t>`; at most `tol_strict`.
    pub blackwell_value: F,
    /// `-c/n + phi(x_{t+1}) - phi(x_t)`; at most `tol_strict`.
    pub telescoping_value: F,
}

impl<F: Real> ForecasterState<F> {
    /// Fresh state at round 0 with zero regrets.
    pub fn new(
        horizon: usize,
        n_experts: usize,
        potential: Potential<F>,
        loss: LossFunction<F>,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::Rejected("horizon must be at least 1".into()));
        }
        if n_experts == 0 {
            return Err(Error::Rejected("need at least one expert".into()));
        }
        Ok(Self {
            x: RegretVector::zeros(n_experts),
            round: 0,
            horizon,
            potential,
            loss,
            expert_cum_loss: vec![F::zero(); n_experts],
            forecaster_cum_loss: F::zero(),
        })
    }

    /// Resume from a given regret state. Cumulative losses are seeded
    /// consistently with `x_i = (forecaster_loss - expert_loss_i)/sqrt(n)`.
    pub fn with_regrets(
        x: RegretVector<F>,
        round: usize,
        horizon: usize,
        potential: Potential<F>,
        loss: LossFunction<F>,
    ) -> Result<Self> {
        if horizon == 0 || round > horizon {
            return Err(Error::Rejected("round must lie in [0, horizon]".into()));
        }
        let sqrt_n = F::from_usize(horizon).unwrap().sqrt();
        let expert_cum_loss = x.as_slice().iter().map(|&xi| -xi * sqrt_n).collect();
        Ok(Self {
            x,
            round,
            horizon,
            potential,
            loss,
            expert_cum_loss,
            forecaster_cum_loss: F::zero(),
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

    pub fn potential(&self) -> &Potential<F> {
        &self.potential
    }

    pub fn loss(&self) -> &LossFunction<F> {
        &self.loss
    }

    pub fn n_experts(&self) -> usize {
        self.x.len()
    }

    /// Forecaster's cumulative loss so far.
    pub fn cumulative_loss(&self) -> F {
        self.forecaster_cum_loss
    }

    /// Per-expert cumulative losses so far.
    pub fn expert_cumulative_losses(&self) -> &[F] {
        &self.expert_cum_loss
    }

    /// The guarantee `(c + phi(0)) * sqrt(n)` this state's potential certifies.
    pub fn regret_bound(&self) -> F {
        self.potential.bound_constant(self.n_experts())
            * F::from_usize(self.horizon).unwrap().sqrt()
    }

    /// For the exponential potential, the same weights in their
    /// cumulative-loss form `softmax(-eta L / sqrt(n))`.
    pub fn loss_softmax_weights(&self) -> Option<WeightVector<F>> {
        let eta = self.potential.eta()?;
        let sqrt_n = F::from_usize(self.horizon).unwrap().sqrt();
        let scaled: Vec<F> = self.expert_cum_loss.iter().map(|&l| -l / sqrt_n).collect();
        Some(
            WeightVector::new(softmax_scaled(&scaled, eta))
                .expect("softmax output is a simplex point"),
        )
    }

    /// Weights and prediction for this round's advice.
    pub fn predict(&self, advice: &AdviceVector<F>) -> Result<(WeightVector<F>, F)> {
        if self.round >= self.horizon {
            return Err(Error::Sequencing(format!(
                "horizon {} exhausted",
                self.horizon
            )));
        }
        if advice.len() != self.n_experts() {
            return Err(Error::Rejected(format!(
                "{} advices for {} experts",
                advice.len(),
                self.n_experts()
            )));
        }
        let weights = self.potential.weights_or_uniform(self.x.as_slice())?;
        #[cfg(debug_assertions)]
        if let Some(by_loss) = self.loss_softmax_weights() {
            for (a, b) in weights.iter().zip(by_loss.iter()) {
                debug_assert!(
                    (a - b).abs() <= F::tol_ident(),
                    "gradient weights diverged from cumulative-loss softmax"
                );
            }
        }
        let prediction = combine_advice(&weights, advice)?;
        Ok((weights, prediction))
    }

    /// Play one round: predict, suffer the outcome, update the state, and
    /// audit the Blackwell and telescoping inequalities.
    pub fn observe(&self, advice: &AdviceVector<F>, outcome: F) -> Result<(Self, RoundRecord<F>)> {
        let (weights, prediction) = self.predict(advice)?;
        let increments = regret_increment(&weights, advice, outcome, &self.loss)?;

        let gradient = self.potential.gradient(self.x.as_slice());
        let blackwell_value = gradient
            .iter()
            .zip(increments.as_slice())
            .map(|(&g, &r)| g * r)
            .sum::<F>();
        if blackwell_value > F::tol_strict() {
            return Err(Error::InvariantViolation {
                round: self.round,
                check: "blackwell",
                value: blackwell_value.to_f64().unwrap_or(f64::NAN),
            });
        }

        let horizon = F::from_usize(self.horizon).unwrap();
        let next_x = self.x.step(&increments, horizon.sqrt().recip());
        let telescoping_value = -self.potential.hessian_constant() / horizon
            + self.potential.value(next_x.as_slice())
            - self.potential.value(self.x.as_slice());
        if telescoping_value > F::tol_strict() {
            return Err(Error::InvariantViolation {
                round: self.round,
                check: "telescoping",
                value: telescoping_value.to_f64().unwrap_or(f64::NAN),
            });
        }

        let mut next = self.clone();
        next.x = next_x;
        next.round += 1;
        next.forecaster_cum_loss += self.loss.evaluate(prediction, outcome)?;
        for (cum, &a) in next.expert_cum_loss.iter_mut().zip(advice.as_slice()) {
            *cum += self.loss.evaluate(a, outcome)?;
        }

        let record = RoundRecord {
            round: self.round,
            advice: advice.clone(),
            weights,
            prediction,
            outcome,
            increments,
            blackwell_value,
            telescoping_value,
        };
        Ok((next, record))
    }
}

/// Run the forecaster over paired advice/outcome streams covering the
/// remaining horizon.
pub fn run_forecast<F: Real>(
    mut state: ForecasterState<F>,
    advice_stream: &[AdviceVector<F>],
    outcome_stream: &[F],
) -> Result<(Vec<RoundRecord<F>>, ForecasterState<F>)> {
    if advice_stream.len() != outcome_stream.len() {
        return Err(Error::Sequencing(format!(
            "{} advice rounds vs {} outcomes",
            advice_stream.len(),
            outcome_stream.len()
        )));
    }
    let remaining = state.horizon - state.round;
    if advice_stream.len() != remaining {
        return Err(Error::Sequencing(format!(
            "streams cover {} rounds, {} remain",
            advice_stream.len(),
            remaining
        )));
    }
    let mut records = Vec::with_capacity(advice_stream.len());
    for (advice, &outcome) in advice_stream.iter().zip(outcome_stream) {
        let (next, record) = state.observe(advice, outcome)?;
        state = next;
        records.push(record);
    }
    Ok((records, state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abs_loss() -> LossFunction<f64> {
        LossFunction::absolute()
    }

    fn advice(vals: &[f64]) -> AdviceVector<f64> {
        AdviceVector::new(vals.to_vec(), &abs_loss()).unwrap()
    }

    #[test]
    fn round_zero_is_uniform() {
        let state =
            ForecasterState::new(10, 4, Potential::exponential_optimal(4), abs_loss()).unwrap();
        let f = advice(&[0.1, 0.3, 0.5, 0.9]);
        let (w, a) = state.predict(&f).unwrap();
        assert_eq!(w.as_slice(), &[0.25; 4]);
        assert!((a - 0.45).abs() < 1e-15);
    }

    #[test]
    fn predict_from_resumed_state() {
        let x = RegretVector::new(vec![0.0, 2f64.ln()]).unwrap();
        let state = ForecasterState::with_regrets(
            x,
            1,
            1, // round == horizon: prediction must refuse
            Potential::exponential(1.0).unwrap(),
            abs_loss(),
        )
        .unwrap();
        assert!(matches!(
            state.predict(&advice(&[0.0, 1.0])),
            Err(Error::Sequencing(_))
        ));

        let x = RegretVector::new(vec![0.0, 2f64.ln()]).unwrap();
        let state = ForecasterState::with_regrets(
            x,
            0,
            1,
            Potential::exponential(1.0).unwrap(),
            abs_loss(),
        )
        .unwrap();
        let (w, _) = state.predict(&advice(&[0.0, 1.0])).unwrap();
        assert!((w.get(0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((w.get(1) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn identical_advice_pins_the_prediction() {
        let state =
            ForecasterState::new(5, 3, Potential::exponential_optimal(3), abs_loss()).unwrap();
        let (_, a) = state.predict(&advice(&[0.7, 0.7, 0.7])).unwrap();
        assert!((a - 0.7).abs() < 1e-15);
    }

    #[test]
    fn observe_hand_example() {
        // n = 4, round 0: weights (1/2,1/2), prediction 1/2, r = (-1/2, 1/2),
        // x' = (-1/4, 1/4), blackwell = 0
        let state =
            ForecasterState::new(4, 2, Potential::exponential(1.0).unwrap(), abs_loss()).unwrap();
        let (next, rec) = state.observe(&advice(&[0.0, 1.0]), 1.0).unwrap();
        assert_eq!(rec.weights.as_slice(), &[0.5, 0.5]);
        assert_eq!(rec.prediction, 0.5);
        assert_eq!(rec.increments.as_slice(), &[-0.5, 0.5]);
        assert_eq!(next.regrets().as_slice(), &[-0.25, 0.25]);
        assert!(rec.blackwell_value.abs() < 1e-15);
        assert!(rec.telescoping_value <= 1e-12);
        assert_eq!(next.round(), 1);
    }

    #[test]
    fn single_expert_has_zero_blackwell() {
        let mut state =
            ForecasterState::new(8, 1, Potential::exponential(1.0).unwrap(), abs_loss()).unwrap();
        for t in 0..8 {
            let f = advice(&[(t as f64) / 10.0]);
            let (next, rec) = state.observe(&f, (t % 2) as f64).unwrap();
            assert_eq!(rec.blackwell_value, 0.0);
            assert_eq!(rec.increments.as_slice(), &[0.0]);
            state = next;
        }
        assert!(state.regrets().max_coordinate() <= 0.0);
    }

    #[test]
    fn run_forecast_respects_bound_for_adversarial_single_round() {
        // n = 1, N = 2: regret stays under sqrt(2 ln 2) for either outcome
        for b in [0.0, 1.0] {
            let state =
                ForecasterState::new(1, 2, Potential::exponential_optimal(2), abs_loss()).unwrap();
            let (records, end) = run_forecast(state, &[advice(&[0.0, 1.0])], &[b]).unwrap();
            assert_eq!(records.len(), 1);
            let regret = end.regrets().max_coordinate(); // sqrt(1) scaling
            assert!(regret <= (2.0 * 2f64.ln()).sqrt() + 1e-9);
        }
    }

    #[test]
    fn perfect_expert_keeps_regret_equal_to_own_loss() {
        // constant outcome 0 with one expert always advising 0: that expert
        // never loses, so the regret is the forecaster's whole loss and the
        // certificate still caps it
        let n = 64;
        let state =
            ForecasterState::new(n, 3, Potential::exponential_optimal(3), abs_loss()).unwrap();
        let advices = vec![advice(&[0.0, 0.8, 0.4]); n];
        let outcomes = vec![0.0; n];
        let (_, end) = run_forecast(state, &advices, &outcomes).unwrap();
        assert_eq!(end.expert_cumulative_losses()[0], 0.0);
        let regret = end.cumulative_loss();
        assert!(regret >= 0.0);
        assert!(regret <= (2.0 * (n as f64) * 3f64.ln()).sqrt() + 1e-9);
    }

    #[test]
    fn stream_length_mismatch_is_sequencing_error() {
        let state =
            ForecasterState::new(3, 2, Potential::exponential_optimal(2), abs_loss()).unwrap();
        let err = run_forecast(state, &[advice(&[0.0, 1.0])], &[1.0]).unwrap_err();
        assert!(matches!(err, Error::Sequencing(_)));
    }

    #[test]
    fn broken_certificate_aborts_with_telescoping_violation() {
        // c = 0 cannot absorb the curvature term
        let potential = Potential::exponential_with_constant(1.0, 0.0).unwrap();
        let state = ForecasterState::new(4, 2, potential, abs_loss()).unwrap();
        let err = state.observe(&advice(&[0.0, 1.0]), 1.0).unwrap_err();
        match err {
            Error::InvariantViolation { check, round, .. } => {
                assert_eq!(check, "telescoping");
                assert_eq!(round, 0);
            }
            other => panic!("expected invariant violation, got {other}"),
        }
    }

    #[test]
    fn gradient_weights_match_loss_softmax_every_round() {
        let mut state =
            ForecasterState::new(64, 3, Potential::exponential_optimal(3), abs_loss()).unwrap();
        let advices = [[0.0, 0.5, 1.0], [0.2, 0.9, 0.4], [1.0, 0.0, 0.3]];
        for t in 0..64 {
            let f = advice(&advices[t % 3]);
            let (next, _) = state.observe(&f, ((t * 7) % 2) as f64).unwrap();
            let by_gradient = next.potential().weights(next.regrets().as_slice()).unwrap();
            let by_loss = next.loss_softmax_weights().unwrap();
            for (a, b) in by_gradient.iter().zip(by_loss.iter()) {
                assert!((a - b).abs() < 1e-9);
            }
            state = next;
        }
    }
}
