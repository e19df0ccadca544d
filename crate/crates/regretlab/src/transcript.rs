//! Transcript file format.
//!
//! Line-delimited: one header line holding the config as a single JSON
//! object, then one line per round. Averaged rounds are
//!
//! `t,f_1..f_N,p_1..p_N,a,b,r_1..r_N,blackwell,telescoping`
//!
//! and randomized rounds are
//!
//! `t,p_1..p_N,i,b,r_1..r_N,sampled_loss`
//!
//! with `i` the 0-based sampled action index and `r` the expected
//! increments. Numbers print as shortest round-trip decimals, so parsing a
//! serialized transcript reproduces it bit-exactly, and identical runs
//! produce byte-identical files.

use std::io::{self, Write as _};

use crate::error::{Error, Result};
use crate::forecaster::RoundRecord;
use crate::game::{GameConfig, GameMode, GameTranscript, RoundEvent, TranscriptRounds};
use crate::regret::{AdviceVector, RegretIncrement};
use crate::scalar::Real;
use crate::simplex::WeightVector;

/// Write the config header line.
pub fn write_header<F: Real, W: io::Write>(out: &mut W, config: &GameConfig<F>) -> io::Result<()> {
    let header = serde_json::to_string(config).expect("config serializes");
    writeln!(out, "{header}")
}

/// Write one round line.
pub fn write_round<F: Real, W: io::Write>(out: &mut W, event: &RoundEvent<F>) -> io::Result<()> {
    match event {
        RoundEvent::Averaged(r) => writeln!(out, "{}", averaged_line(r)),
        RoundEvent::Randomized(r) => writeln!(out, "{}", randomized_line(r)),
    }
}

fn averaged_line<F: Real>(r: &RoundRecord<F>) -> String {
    let mut fields = vec![r.round.to_string()];
    fields.extend(r.advice.as_slice().iter().map(|v| v.to_string()));
    fields.extend(r.weights.as_slice().iter().map(|v| v.to_string()));
    fields.push(r.prediction.to_string());
    fields.push(r.outcome.to_string());
    fields.extend(r.increments.as_slice().iter().map(|v| v.to_string()));
    fields.push(r.blackwell_value.to_string());
    fields.push(r.telescoping_value.to_string());
    fields.join(",")
}

fn randomized_line<F: Real>(r: &crate::randomized::RandomizedRound<F>) -> String {
    let mut fields = vec![r.round.to_string()];
    fields.extend(r.distribution.as_slice().iter().map(|v| v.to_string()));
    fields.push(r.sampled_action.to_string());
    fields.push(r.outcome.to_string());
    fields.extend(r.expected_increment.iter().map(|v| v.to_string()));
    fields.push(r.sampled_loss.to_string());
    fields.join(",")
}

/// Serialize a whole transcript.
pub fn to_text<F: Real>(transcript: &GameTranscript<F>) -> String {
    let mut out = Vec::new();
    write_header(&mut out, &transcript.config).expect("writing to memory");
    match &transcript.rounds {
        TranscriptRounds::Averaged(rounds) => {
            for r in rounds {
                writeln!(&mut out, "{}", averaged_line(r)).expect("writing to memory");
            }
        }
        TranscriptRounds::Randomized(rounds) => {
            for r in rounds {
                writeln!(&mut out, "{}", randomized_line(r)).expect("writing to memory");
            }
        }
    }
    String::from_utf8(out).expect("transcript lines are utf-8")
}

fn parse_scalar<F: Real>(s: &str) -> Result<F> {
    s.parse::<F>()
        .map_err(|_| Error::Rejected(format!("bad number '{s}' in transcript")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse::<usize>()
        .map_err(|_| Error::Rejected(format!("bad index '{s}' in transcript")))
}

/// Parse a serialized transcript and recompute its audit summary. The
/// summary accumulates in round order with the same arithmetic as the
/// engine, so `from_text(to_text(t)) == t` bit-exactly.
pub fn from_text<F: Real>(text: &str) -> Result<GameTranscript<F>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Rejected("empty transcript".into()))?;
    let config: GameConfig<F> = serde_json::from_str(header)
        .map_err(|e| Error::Rejected(format!("bad transcript header: {e}")))?;
    let n = config.n_experts;

    match config.mode {
        GameMode::Averaged => {
            let mut rounds = Vec::new();
            let mut own = F::zero();
            let mut experts = vec![F::zero(); n];
            for line in lines {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 3 * n + 5 {
                    return Err(Error::Rejected(format!(
                        "round line has {} fields, expected {}",
                        fields.len(),
                        3 * n + 5
                    )));
                }
                let round = parse_usize(fields[0])?;
                let advice_vals = fields[1..=n]
                    .iter()
                    .map(|s| parse_scalar(s))
                    .collect::<Result<Vec<F>>>()?;
                let weight_vals = fields[n + 1..=2 * n]
                    .iter()
                    .map(|s| parse_scalar(s))
                    .collect::<Result<Vec<F>>>()?;
                let prediction = parse_scalar(fields[2 * n + 1])?;
                let outcome = parse_scalar(fields[2 * n + 2])?;
                let increment_vals = fields[2 * n + 3..=3 * n + 2]
                    .iter()
                    .map(|s| parse_scalar(s))
                    .collect::<Result<Vec<F>>>()?;
                let blackwell_value = parse_scalar(fields[3 * n + 3])?;
                let telescoping_value = parse_scalar(fields[3 * n + 4])?;

                own += config.loss.evaluate(prediction, outcome)?;
                for (acc, &a) in experts.iter_mut().zip(&advice_vals) {
                    *acc += config.loss.evaluate(a, outcome)?;
                }
                rounds.push(RoundRecord {
                    round,
                    advice: AdviceVector::new(advice_vals, &config.loss)?,
                    weights: WeightVector::new(weight_vals)?,
                    prediction,
                    outcome,
                    increments: RegretIncrement::from_raw(increment_vals),
                    blackwell_value,
                    telescoping_value,
                });
            }
            let best = experts
                .iter()
                .copied()
                .fold(F::infinity(), |acc, l| if l < acc { l } else { acc });
            let final_regret = if rounds.is_empty() {
                F::zero()
            } else {
                own - best
            };
            let potential = config.build_potential()?;
            let bound_value =
                potential.bound_constant(n) * F::from_usize(config.horizon).unwrap().sqrt();
            Ok(GameTranscript {
                bound_satisfied: final_regret <= bound_value + F::tol_ident(),
                config,
                rounds: TranscriptRounds::Averaged(rounds),
                final_regret,
                bound_value,
            })
        }
        GameMode::Randomized => {
            let actions = config.resolve_actions()?;
            let mut rounds = Vec::new();
            let mut own = F::zero();
            let mut fixed = vec![F::zero(); actions.len()];
            for line in lines {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 2 * n + 4 {
                    return Err(Error::Rejected(format!(
                        "round line has {} fields, expected {}",
                        fields.len(),
                        2 * n + 4
                    )));
                }
                let round = parse_usize(fields[0])?;
                let dist_vals = fields[1..=n]
                    .iter()
                    .map(|s| parse_scalar(s))
                    .collect::<Result<Vec<F>>>()?;
                let sampled_action = parse_usize(fields[n + 1])?;
                let outcome = parse_scalar(fields[n + 2])?;
                let increments = fields[n + 3..=2 * n + 2]
                    .iter()
                    .map(|s| parse_scalar(s))
                    .collect::<Result<Vec<F>>>()?;
                let sampled_loss = parse_scalar(fields[2 * n + 3])?;

                let distribution = WeightVector::new(dist_vals)?;
                let k = actions.outcome_index(outcome)?;
                own += actions.expected_loss(&distribution, k);
                for (acc, i) in fixed.iter_mut().zip(0..) {
                    *acc += actions.loss_at(i, k);
                }
                rounds.push(crate::randomized::RandomizedRound {
                    round,
                    distribution,
                    sampled_action,
                    outcome,
                    expected_increment: increments,
                    sampled_loss,
                });
            }
            let best = fixed
                .iter()
                .copied()
                .fold(F::infinity(), |acc, l| if l < acc { l } else { acc });
            let final_regret = if rounds.is_empty() {
                F::zero()
            } else {
                own - best
            };
            let potential = config.build_potential()?;
            let bound_value =
                potential.bound_constant(n) * F::from_usize(config.horizon).unwrap().sqrt();
            Ok(GameTranscript {
                bound_satisfied: final_regret <= bound_value + F::tol_ident(),
                config,
                rounds: TranscriptRounds::Randomized(rounds),
                final_regret,
                bound_value,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{run_game, AdversaryPolicy, GameMode};
    use crate::loss::LossFunction;
    use crate::potential::PotentialSpec;
    use crate::randomized::ActionSet;

    #[test]
    fn averaged_round_trip_is_bit_exact() {
        for seed in [0u64, 1, 99] {
            let mut config = crate::game::GameConfig::<f64>::new(25, 3);
            config.seed = seed;
            // an awkward rate produces long decimals
            config.potential = PotentialSpec::Exponential {
                eta: Some(0.123456789),
                c: None,
            };
            let t = run_game(&config).unwrap();
            let text = to_text(&t);
            let back: GameTranscript<f64> = from_text(&text).unwrap();
            assert_eq!(t, back);
            assert_eq!(text, to_text(&back));
        }
    }

    #[test]
    fn squared_loss_round_trip() {
        let mut config = crate::game::GameConfig::<f64>::new(12, 2);
        config.loss = LossFunction::squared();
        config.adversary_policy = AdversaryPolicy::ObliviousSeeded;
        let t = run_game(&config).unwrap();
        let back: GameTranscript<f64> = from_text(&to_text(&t)).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn randomized_round_trip_is_bit_exact() {
        let mut config = crate::game::GameConfig::<f64>::new(30, 3);
        config.mode = GameMode::Randomized;
        config.action_set = Some(ActionSet::non_convex_demo());
        config.seed = 5;
        let t = run_game(&config).unwrap();
        let text = to_text(&t);
        let back: GameTranscript<f64> = from_text(&text).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn malformed_transcripts_are_rejected() {
        assert!(from_text::<f64>("").is_err());
        assert!(from_text::<f64>("{not json}").is_err());
        let config = crate::game::GameConfig::<f64>::new(2, 2);
        let header = serde_json::to_string(&config).unwrap();
        assert!(from_text::<f64>(&format!("{header}\n1,2,3")).is_err());
    }
}
