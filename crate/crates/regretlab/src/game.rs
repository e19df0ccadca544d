//! The repeated-game simulator: expert and adversary policies, bound
//! auditing, transcripts, and parameter sweeps.
//!
//! The order of play each round follows the game's informational structure:
//! experts announce advice knowing only past outcomes, the forecaster
//! commits to weights knowing the advice, and the adversary picks the
//! outcome last, having seen everything. The adversary policies range from
//! an oblivious seeded stream to a greedy one-step potential maximizer to a
//! depth-limited lookahead against the implemented strategy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecaster::{ForecasterState, RoundRecord};
use crate::loss::LossFunction;
use crate::potential::{Potential, PotentialSpec};
use crate::randomized::{randomized_increment, ActionSet, RandomizedRound, RandomizedState};
use crate::regret::AdviceVector;
use crate::rng::SeedStream;
use crate::scalar::Real;
use crate::simplex::WeightVector;

const EXPERT_TAG: u64 = 1;
const ADVERSARY_TAG: u64 = 2;
const SAMPLER_TAG: u64 = 3;

/// Per-run work ceiling for the lookahead adversary.
pub const LOOKAHEAD_BUDGET: u64 = 20_000_000;

/// How the experts produce advice. They see past outcomes but never the
/// forecaster's weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ExpertPolicy<F> {
    /// Advice given explicitly, one row per round.
    FixedTable { rows: Vec<Vec<F>> },
    /// Each expert draws uniformly from the prediction interval.
    SeededRandom,
    /// Expert `i` always advises `lo + (hi-lo) * i/(N-1)` (the domain
    /// midpoint when there is a single expert).
    ConstantGrid,
}

/// How the adversary picks outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum AdversaryPolicy {
    /// Outcome stream drawn up front from the seed, independent of play.
    ObliviousSeeded,
    /// Maximizes the one-step potential increase; ties break toward the
    /// smaller outcome. The potential is what the bound controls, so this
    /// is the strongest one-step attack on the implemented forecaster.
    Greedy,
    /// Greedy with `depth` extra rounds of exhaustive lookahead against the
    /// potential strategy (depth 0 is exactly `Greedy`). Subject to
    /// [`LOOKAHEAD_BUDGET`].
    MinimaxLookahead { depth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameMode {
    /// Weighted-average prediction of expert advice.
    Averaged,
    /// Sampled prediction over a fixed action set.
    Randomized,
}

/// Full description of one game; identical configs replay identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig<F> {
    pub horizon: usize,
    pub n_experts: usize,
    pub loss: LossFunction<F>,
    pub potential: PotentialSpec<F>,
    pub expert_policy: ExpertPolicy<F>,
    pub adversary_policy: AdversaryPolicy,
    pub seed: u64,
    pub mode: GameMode,
    /// Randomized mode only: explicit actions/losses. `None` tabulates the
    /// configured loss on the constant grid of actions.
    pub action_set: Option<ActionSet<F>>,
}

impl<F: Real> GameConfig<F> {
    /// Sensible defaults: absolute loss, optimal-rate exponential potential,
    /// random experts, greedy adversary, seed 0.
    pub fn new(horizon: usize, n_experts: usize) -> Self {
        Self {
            horizon,
            n_experts,
            loss: LossFunction::absolute(),
            potential: PotentialSpec::default_exponential(),
            expert_policy: ExpertPolicy::SeededRandom,
            adversary_policy: AdversaryPolicy::Greedy,
            seed: 0,
            mode: GameMode::Averaged,
            action_set: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Rejected("horizon must be at least 1".into()));
        }
        if self.n_experts == 0 {
            return Err(Error::Rejected("need at least one expert".into()));
        }
        if let ExpertPolicy::FixedTable { rows } = &self.expert_policy {
            if rows.len() != self.horizon {
                return Err(Error::Rejected(format!(
                    "fixed advice table has {} rows for horizon {}",
                    rows.len(),
                    self.horizon
                )));
            }
            for row in rows {
                if row.len() != self.n_experts {
                    return Err(Error::Rejected("fixed advice row width mismatch".into()));
                }
            }
        }
        if let Some(actions) = &self.action_set {
            if self.mode != GameMode::Randomized {
                return Err(Error::Rejected(
                    "action sets only apply to randomized mode".into(),
                ));
            }
            if actions.len() != self.n_experts {
                return Err(Error::Rejected(format!(
                    "action set has {} actions for {} experts",
                    actions.len(),
                    self.n_experts
                )));
            }
        }
        if let AdversaryPolicy::MinimaxLookahead { depth } = self.adversary_policy {
            let need = self.lookahead_work(depth);
            if need > LOOKAHEAD_BUDGET {
                return Err(Error::BudgetExceeded {
                    needed: need,
                    budget: LOOKAHEAD_BUDGET,
                });
            }
        }
        Ok(())
    }

    fn lookahead_work(&self, depth: usize) -> u64 {
        let outcomes = self.loss.outcomes().len() as u64;
        let per_step = match self.mode {
            // lookahead enumerates advice profiles from a 3-point grid
            GameMode::Averaged => 3u64.saturating_pow(self.n_experts as u32) * outcomes,
            GameMode::Randomized => outcomes,
        };
        let mut per_round: u64 = outcomes;
        for _ in 0..depth {
            per_round = per_round.saturating_mul(per_step);
        }
        per_round.saturating_mul(self.horizon as u64)
    }

    pub fn build_potential(&self) -> Result<Potential<F>> {
        self.potential.build(self.n_experts)
    }

    /// Actions for randomized mode: the explicit set, or the configured
    /// loss tabulated on the constant grid.
    pub fn resolve_actions(&self) -> Result<ActionSet<F>> {
        match &self.action_set {
            Some(actions) => Ok(actions.clone()),
            None => ActionSet::from_loss(constant_grid(&self.loss, self.n_experts), &self.loss),
        }
    }
}

fn constant_grid<F: Real>(loss: &LossFunction<F>, n: usize) -> Vec<F> {
    if n == 1 {
        return vec![loss.midpoint()];
    }
    let width = loss.hi() - loss.lo();
    (0..n)
        .map(|i| loss.lo() + width * F::from_usize(i).unwrap() / F::from_usize(n - 1).unwrap())
        .collect()
}

/// Rounds of a finished game, by mode.
#[derive(Debug, Clone, PartialEq)]
pub enum TranscriptRounds<F> {
    Averaged(Vec<RoundRecord<F>>),
    Randomized(Vec<RandomizedRound<F>>),
}

impl<F> TranscriptRounds<F> {
    pub fn len(&self) -> usize {
        match self {
            TranscriptRounds::Averaged(r) => r.len(),
            TranscriptRounds::Randomized(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A finished game with its bound audit.
#[derive(Debug, Clone, PartialEq)]
pub struct GameTranscript<F> {
    pub config: GameConfig<F>,
    pub rounds: TranscriptRounds<F>,
    /// Cumulative regret (expected regret in randomized mode).
    pub final_regret: F,
    /// `(c + phi(0)) * sqrt(n)`.
    pub bound_value: F,
    pub bound_satisfied: bool,
}

/// Summary of a game whose rounds were streamed elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameOutcome<F> {
    pub final_regret: F,
    pub bound_value: F,
    pub bound_satisfied: bool,
    pub rounds_played: usize,
}

/// One round as it leaves the engine.
#[derive(Debug, Clone, PartialEq)]
pub enum RoundEvent<F> {
    Averaged(RoundRecord<F>),
    Randomized(RandomizedRound<F>),
}

/// The outcome maximizing the one-step potential increase
/// `phi(x + r(p,f,b)/sqrt(n))`, ties toward the smaller outcome.
pub fn greedy_adversary<F: Real>(
    potential: &Potential<F>,
    loss: &LossFunction<F>,
    p: &WeightVector<F>,
    f: &AdviceVector<F>,
    x: &[F],
    horizon: usize,
) -> Result<F> {
    pick_outcome_averaged(potential, loss, p, f, x, horizon, 0)
}

fn pick_outcome_averaged<F: Real>(
    potential: &Potential<F>,
    loss: &LossFunction<F>,
    p: &WeightVector<F>,
    f: &AdviceVector<F>,
    x: &[F],
    horizon: usize,
    depth: usize,
) -> Result<F> {
    let inv_sqrt_n = F::from_usize(horizon).unwrap().sqrt().recip();
    let prediction = p.dot(f.as_slice())?;
    let mut best_b = loss.outcomes()[0];
    let mut best_value = F::neg_infinity();
    for &b in loss.outcomes() {
        let own = loss.evaluate(prediction, b)?;
        let next: Vec<F> = x
            .iter()
            .zip(f.as_slice())
            .map(|(&xi, &fi)| Ok(xi + (own - loss.evaluate(fi, b)?) * inv_sqrt_n))
            .collect::<Result<_>>()?;
        let value = lookahead_value_averaged(potential, loss, &next, depth, inv_sqrt_n)?;
        if value > best_value {
            best_value = value;
            best_b = b;
        }
    }
    Ok(best_b)
}

/// Worst reachable potential after `depth` more rounds in which experts and
/// adversary both play exhaustively over a 3-point advice grid while the
/// forecaster follows the potential strategy.
fn lookahead_value_averaged<F: Real>(
    potential: &Potential<F>,
    loss: &LossFunction<F>,
    x: &[F],
    depth: usize,
    inv_sqrt_n: F,
) -> Result<F> {
    if depth == 0 {
        return Ok(potential.value(x));
    }
    let grid = [loss.lo(), loss.midpoint(), loss.hi()];
    let p = potential.weights_or_uniform(x)?;
    let mut worst = F::neg_infinity();
    let mut idx = vec![0usize; x.len()];
    loop {
        let f: Vec<F> = idx.iter().map(|&i| grid[i]).collect();
        let prediction = p.dot(&f)?;
        for &b in loss.outcomes() {
            let own = loss.evaluate(prediction, b)?;
            let next: Vec<F> = x
                .iter()
                .zip(&f)
                .map(|(&xi, &fi)| Ok(xi + (own - loss.evaluate(fi, b)?) * inv_sqrt_n))
                .collect::<Result<_>>()?;
            worst = worst.max(lookahead_value_averaged(
                potential,
                loss,
                &next,
                depth - 1,
                inv_sqrt_n,
            )?);
        }
        let mut axis = 0;
        loop {
            if axis == idx.len() {
                return Ok(worst);
            }
            idx[axis] += 1;
            if idx[axis] < grid.len() {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

fn pick_outcome_randomized<F: Real>(
    potential: &Potential<F>,
    actions: &ActionSet<F>,
    p: &WeightVector<F>,
    x: &[F],
    horizon: usize,
    depth: usize,
) -> Result<F> {
    let inv_sqrt_n = F::from_usize(horizon).unwrap().sqrt().recip();
    let mut best_b = actions.outcomes()[0];
    let mut best_value = F::neg_infinity();
    for &b in actions.outcomes() {
        let r = randomized_increment(p, b, actions)?;
        let next: Vec<F> = x
            .iter()
            .zip(&r)
            .map(|(&xi, &ri)| xi + ri * inv_sqrt_n)
            .collect();
        let value = lookahead_value_randomized(potential, actions, &next, depth, inv_sqrt_n)?;
        if value > best_value {
            best_value = value;
            best_b = b;
        }
    }
    Ok(best_b)
}

fn lookahead_value_randomized<F: Real>(
    potential: &Potential<F>,
    actions: &ActionSet<F>,
    x: &[F],
    depth: usize,
    inv_sqrt_n: F,
) -> Result<F> {
    if depth == 0 {
        return Ok(potential.value(x));
    }
    let p = potential.weights_or_uniform(x)?;
    let mut worst = F::neg_infinity();
    for &b in actions.outcomes() {
        let r = randomized_increment(&p, b, actions)?;
        let next: Vec<F> = x
            .iter()
            .zip(&r)
            .map(|(&xi, &ri)| xi + ri * inv_sqrt_n)
            .collect();
        worst = worst.max(lookahead_value_randomized(
            potential,
            actions,
            &next,
            depth - 1,
            inv_sqrt_n,
        )?);
    }
    Ok(worst)
}

/// Run a game, streaming each round into `sink` (transcript writers, bound
/// trackers) without retaining history.
pub fn run_game_streaming<F: Real>(
    config: &GameConfig<F>,
    mut sink: impl FnMut(&RoundEvent<F>) -> Result<()>,
) -> Result<GameOutcome<F>> {
    config.validate()?;
    let potential = config.build_potential()?;
    let root = SeedStream::new(config.seed);
    let mut expert_rng = root.split(EXPERT_TAG);
    let mut adversary_rng = root.split(ADVERSARY_TAG);

    match config.mode {
        GameMode::Averaged => {
            let mut state = ForecasterState::new(
                config.horizon,
                config.n_experts,
                potential.clone(),
                config.loss.clone(),
            )?;
            let grid_advice = constant_grid(&config.loss, config.n_experts);
            for t in 0..config.horizon {
                let advice = match &config.expert_policy {
                    ExpertPolicy::FixedTable { rows } => {
                        AdviceVector::new(rows[t].clone(), &config.loss)?
                    }
                    ExpertPolicy::SeededRandom => AdviceVector::new(
                        (0..config.n_experts)
                            .map(|_| expert_rng.next_in(config.loss.lo(), config.loss.hi()))
                            .collect(),
                        &config.loss,
                    )?,
                    ExpertPolicy::ConstantGrid => {
                        AdviceVector::new(grid_advice.clone(), &config.loss)?
                    }
                };
                let outcome = match config.adversary_policy {
                    AdversaryPolicy::ObliviousSeeded => {
                        let k = adversary_rng.next_u64() as usize % config.loss.outcomes().len();
                        config.loss.outcomes()[k]
                    }
                    AdversaryPolicy::Greedy | AdversaryPolicy::MinimaxLookahead { .. } => {
                        let depth = match config.adversary_policy {
                            AdversaryPolicy::MinimaxLookahead { depth } => {
                                depth.min(config.horizon - t - 1)
                            }
                            _ => 0,
                        };
                        let (weights, _) = state.predict(&advice)?;
                        pick_outcome_averaged(
                            &potential,
                            &config.loss,
                            &weights,
                            &advice,
                            state.regrets().as_slice(),
                            config.horizon,
                            depth,
                        )?
                    }
                };
                let (next, record) = state.observe(&advice, outcome)?;
                state = next;
                sink(&RoundEvent::Averaged(record))?;
            }
            let best_expert = state
                .expert_cumulative_losses()
                .iter()
                .copied()
                .fold(F::infinity(), |acc, l| if l < acc { l } else { acc });
            let final_regret = state.cumulative_loss() - best_expert;
            let bound_value = state.regret_bound();
            Ok(GameOutcome {
                final_regret,
                bound_value,
                bound_satisfied: final_regret <= bound_value + F::tol_ident(),
                rounds_played: config.horizon,
            })
        }
        GameMode::Randomized => {
            let actions = config.resolve_actions()?;
            let mut sampler_rng = root.split(SAMPLER_TAG);
            let mut state =
                RandomizedState::new(config.horizon, potential.clone(), actions.clone())?;
            let mut own_loss = F::zero();
            let mut fixed_losses = vec![F::zero(); actions.len()];
            for t in 0..config.horizon {
                let outcome = match config.adversary_policy {
                    AdversaryPolicy::ObliviousSeeded => {
                        let k = adversary_rng.next_u64() as usize % actions.outcomes().len();
                        actions.outcomes()[k]
                    }
                    AdversaryPolicy::Greedy | AdversaryPolicy::MinimaxLookahead { .. } => {
                        let depth = match config.adversary_policy {
                            AdversaryPolicy::MinimaxLookahead { depth } => {
                                depth.min(config.horizon - t - 1)
                            }
                            _ => 0,
                        };
                        let p = state.distribution()?;
                        pick_outcome_randomized(
                            &potential,
                            &actions,
                            &p,
                            state.regrets().as_slice(),
                            config.horizon,
                            depth,
                        )?
                    }
                };
                let (next, record) = state.step(outcome, &mut sampler_rng)?;
                state = next;
                let k = actions.outcome_index(record.outcome)?;
                own_loss += actions.expected_loss(&record.distribution, k);
                for (acc, i) in fixed_losses.iter_mut().zip(0..) {
                    *acc += actions.loss_at(i, k);
                }
                sink(&RoundEvent::Randomized(record))?;
            }
            let best_fixed =
                fixed_losses
                    .iter()
                    .copied()
                    .fold(F::infinity(), |acc, l| if l < acc { l } else { acc });
            let final_regret = own_loss - best_fixed;
            let bound_value = state.regret_bound();
            Ok(GameOutcome {
                final_regret,
                bound_value,
                bound_satisfied: final_regret <= bound_value + F::tol_ident(),
                rounds_played: config.horizon,
            })
        }
    }
}

/// Run a game and keep every round in memory.
pub fn run_game<F: Real>(config: &GameConfig<F>) -> Result<GameTranscript<F>> {
    let mut averaged = Vec::new();
    let mut randomized = Vec::new();
    let outcome = run_game_streaming(config, |event| {
        match event {
            RoundEvent::Averaged(r) => averaged.push(r.clone()),
            RoundEvent::Randomized(r) => randomized.push(r.clone()),
        }
        Ok(())
    })?;
    let rounds = match config.mode {
        GameMode::Averaged => TranscriptRounds::Averaged(averaged),
        GameMode::Randomized => TranscriptRounds::Randomized(randomized),
    };
    Ok(GameTranscript {
        config: config.clone(),
        rounds,
        final_regret: outcome.final_regret,
        bound_value: outcome.bound_value,
        bound_satisfied: outcome.bound_satisfied,
    })
}

/// The swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepParam<F> {
    Eta(Vec<F>),
    Experts(Vec<usize>),
    Horizon(Vec<usize>),
}

/// Parameter value of one sweep row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepValue<F> {
    Eta(F),
    Experts(usize),
    Horizon(usize),
}

impl<F: Real> std::fmt::Display for SweepValue<F> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepValue::Eta(v) => write!(f, "{v}"),
            SweepValue::Experts(v) => write!(f, "{v}"),
            SweepValue::Horizon(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<F> {
    pub param: SweepValue<F>,
    pub regret: F,
    pub bound: F,
}

/// One game per parameter value; games run concurrently and rows come back
/// in input order. An empty value list yields an empty table.
pub fn sweep<F: Real>(base: &GameConfig<F>, param: &SweepParam<F>) -> Result<Vec<SweepRow<F>>> {
    let configs: Vec<(SweepValue<F>, GameConfig<F>)> = match param {
        SweepParam::Eta(values) => values
            .iter()
            .map(|&eta| {
                let mut config = base.clone();
                config.potential = PotentialSpec::Exponential {
                    eta: Some(eta),
                    c: None,
                };
                (SweepValue::Eta(eta), config)
            })
            .collect(),
        SweepParam::Experts(values) => values
            .iter()
            .map(|&n| {
                let mut config = base.clone();
                config.n_experts = n;
                (SweepValue::Experts(n), config)
            })
            .collect(),
        SweepParam::Horizon(values) => values
            .iter()
            .map(|&n| {
                let mut config = base.clone();
                config.horizon = n;
                (SweepValue::Horizon(n), config)
            })
            .collect(),
    };

    let results: Vec<Result<GameOutcome<F>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|(_, config)| scope.spawn(move || run_game_streaming(config, |_| Ok(()))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    configs
        .into_iter()
        .zip(results)
        .map(|((value, _), outcome)| {
            let outcome = outcome?;
            Ok(SweepRow {
                param: value,
                regret: outcome.final_regret,
                bound: outcome.bound_value,
            })
        })
        .collect()
}
