//! Potential-based forecasting for online prediction with expert advice.
//!
//! The library plays the repeated prediction game: each round `N` experts
//! announce advice, the forecaster commits to a convex combination of it,
//! and an adversary picks the outcome last. The forecaster's weights come
//! from the gradient of a smooth potential over the vector of per-expert
//! regrets, which keeps the cumulative regret under `(c + phi(0)) * sqrt(n)`
//! for any outcome sequence.
//!
//! What lives where:
//!
//! - [`loss`], [`simplex`], [`regret`] — loss functions on a closed interval,
//!   probability weight vectors, and the regret algebra everything else
//!   consumes.
//! - [`potential`] — soft-max style potentials, their gradients, and a
//!   numerical certificate for the domination / Hessian conditions that the
//!   regret bound needs.
//! - [`forecaster`] — the weighted-average forecaster driven by the potential
//!   gradient, with per-round Blackwell and telescoping checks.
//! - [`randomized`] — the finite-action variant where the forecaster samples
//!   an action from the gradient weights.
//! - [`game`] — expert/adversary policies, the simulator, transcripts and
//!   parameter sweeps.
//! - [`minimax`] — an exact brute-force oracle for the worst-case regret of
//!   tiny discretized games, used to audit the potential bound from below.
//!
//! The numeric core is generic over the scalar type through [`scalar::Real`]
//! (`f32` or `f64`); the minimax oracle instead keys its states with exact
//! rationals so memoization never aliases. Concrete `f64` aliases are
//! exported at the crate root.

pub mod error;
pub mod forecaster;
pub mod game;
pub mod loss;
pub mod minimax;
pub mod potential;
pub mod randomized;
pub mod regret;
pub mod rng;
pub mod scalar;
pub mod simplex;
pub mod transcript;

pub use error::{Error, Result};
pub use scalar::Real;

/// Default scalar used by the CLI and the concrete aliases below.
pub type Scalar = f64;

pub type WeightVec = simplex::WeightVector<Scalar>;
pub type AdviceVec = regret::AdviceVector<Scalar>;
pub type RegretVec = regret::RegretVector<Scalar>;
pub type Loss = loss::LossFunction<Scalar>;
pub type Potential = potential::Potential<Scalar>;
pub type Forecaster = forecaster::ForecasterState<Scalar>;
pub type GameConfig = game::GameConfig<Scalar>;
pub type GameTranscript = game::GameTranscript<Scalar>;
