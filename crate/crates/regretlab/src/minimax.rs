//! Brute-force minimax oracle for tiny discretized prediction games.
//!
//! The worst-case scaled regret satisfies a sup-inf-sup recursion: experts
//! move first (advice profile), the forecaster answers (simplex point), the
//! adversary closes (outcome), and the terminal payoff is the coordinate
//! maximum of the regret state. This module evaluates that recursion
//! exactly on finite grids by backward induction.
//!
//! States reached from a starting point are sums of per-round increments,
//! and with grid points given as rationals those sums are exact rationals —
//! so memoization keys never collide or alias, while values are plain
//! `f64`. The oracle is the lower anchor of the audit chain
//!
//! `minimax value <= potential strategy's exhaustive worst case <= c + phi(0)`
//!
//! whose middle term replaces the infimum with the implemented strategy and
//! keeps the exact suprema, and whose outer bound is the potential
//! certificate.
//!
//! Discretization direction matters: coarsening the simplex grid weakens the
//! forecaster and can only raise the value; coarsening the advice or outcome
//! grids weakens the opposition and can only lower it. The middle term has
//! no infimum left, so the comparison against `c + phi(0)` is sound for any
//! grid.

use std::collections::HashMap;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::loss::{LossFunction, LossKind};
use crate::potential::Potential;
use crate::randomized::{randomized_increment, ActionSet};
use crate::scalar::{coordinate_max, Real};
use crate::simplex::WeightVector;

/// Exact grid coordinate.
pub type Rat = Ratio<i128>;

/// Node-visit budget for one oracle evaluation.
pub const NODE_BUDGET: u64 = 100_000_000;

/// Parse `"0.35"`, `"-1"`, or `"3/4"` into an exact rational.
pub fn rat_from_decimal(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Rejected(format!("cannot parse '{s}' as an exact rational"));
    if let Some((num, den)) = s.split_once('/') {
        let n: i128 = num.trim().parse().map_err(|_| bad())?;
        let d: i128 = den.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rat::new(n, d));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1i128, rest),
        None => (1i128, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let int: i128 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| bad())?
    };
    let mut numer = int;
    let mut denom = 1i128;
    for ch in frac_part.chars() {
        let digit = ch.to_digit(10).ok_or_else(bad)? as i128;
        numer = numer
            .checked_mul(10)
            .and_then(|n| n.checked_add(digit))
            .ok_or_else(bad)?;
        denom = denom.checked_mul(10).ok_or_else(bad)?;
    }
    Ok(Rat::new(sign * numer, denom))
}

fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// All simplex points with coordinates `k/denominator`, in odometer order.
pub fn rational_simplex_grid(n_experts: usize, denominator: u32) -> Vec<Vec<Rat>> {
    assert!(n_experts >= 1 && denominator >= 1);
    let mut grid = Vec::new();
    let mut point = vec![0u32; n_experts];
    fill_compositions(&mut grid, &mut point, 0, denominator, denominator);
    grid
}

fn fill_compositions(
    grid: &mut Vec<Vec<Rat>>,
    point: &mut [u32],
    axis: usize,
    left: u32,
    denom: u32,
) {
    if axis + 1 == point.len() {
        point[axis] = left;
        grid.push(
            point
                .iter()
                .map(|&k| Rat::new(k as i128, denom as i128))
                .collect(),
        );
        return;
    }
    for k in 0..=left {
        point[axis] = k;
        fill_compositions(grid, point, axis + 1, left - k, denom);
    }
}

/// The same grid as `f64` simplex points (for the G evaluator).
pub fn float_simplex_grid(n_experts: usize, denominator: u32) -> Vec<WeightVector<f64>> {
    rational_simplex_grid(n_experts, denominator)
        .into_iter()
        .map(|p| {
            WeightVector::new(p.into_iter().map(rat_to_f64).collect())
                .expect("grid points lie on the simplex")
        })
        .collect()
}

/// A fully discretized game instance at desk scale.
#[derive(Debug, Clone)]
pub struct DiscreteGameSpec {
    horizon: usize,
    n_experts: usize,
    advice_grid: Vec<Rat>,
    simplex_grid: Vec<Vec<Rat>>,
    outcomes: Vec<Rat>,
    loss: LossKind,
    node_budget: u64,
}

impl DiscreteGameSpec {
    pub fn new(
        horizon: usize,
        n_experts: usize,
        advice_grid: Vec<Rat>,
        simplex_grid: Vec<Vec<Rat>>,
        outcomes: Vec<Rat>,
        loss: LossKind,
    ) -> Result<Self> {
        if horizon == 0 || horizon > 6 {
            return Err(Error::Rejected("horizon must lie in 1..=6".into()));
        }
        if n_experts == 0 || n_experts > 3 {
            return Err(Error::Rejected("expert count must lie in 1..=3".into()));
        }
        if advice_grid.is_empty() || advice_grid.len() > 5 {
            return Err(Error::Rejected("advice grid must have 1..=5 points".into()));
        }
        if outcomes.is_empty() || outcomes.len() > 3 {
            return Err(Error::Rejected("outcome set must have 1..=3 points".into()));
        }
        if simplex_grid.is_empty() {
            return Err(Error::Rejected("simplex grid must be non-empty".into()));
        }
        let zero = Rat::new(0, 1);
        let one = Rat::new(1, 1);
        for v in advice_grid.iter().chain(outcomes.iter()) {
            if *v < zero || *v > one {
                return Err(Error::Rejected("grid values must lie in [0,1]".into()));
            }
        }
        for p in &simplex_grid {
            if p.len() != n_experts {
                return Err(Error::Rejected("simplex grid dimension mismatch".into()));
            }
            if p.iter().any(|w| *w < zero) || p.iter().sum::<Rat>() != one {
                return Err(Error::Rejected("simplex grid point off the simplex".into()));
            }
        }
        Ok(Self {
            horizon,
            n_experts,
            advice_grid,
            simplex_grid,
            outcomes,
            loss,
            node_budget: NODE_BUDGET,
        })
    }

    /// Override the node-visit budget (mainly for tests and small boxes).
    pub fn with_node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    /// Standard instance: advice grid `{0, 1/2, 1}`, outcomes `{0, 1}`,
    /// simplex spacing `1/20`.
    pub fn standard(horizon: usize, n_experts: usize, loss: LossKind) -> Result<Self> {
        Self::new(
            horizon,
            n_experts,
            vec![Rat::new(0, 1), Rat::new(1, 2), Rat::new(1, 1)],
            rational_simplex_grid(n_experts, 20),
            vec![Rat::new(0, 1), Rat::new(1, 1)],
            loss,
        )
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_experts(&self) -> usize {
        self.n_experts
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss
    }

    fn loss_rat(&self, a: Rat, b: Rat) -> Rat {
        match self.loss {
            LossKind::Absolute => {
                let d = a - b;
                if d < Rat::new(0, 1) {
                    -d
                } else {
                    d
                }
            }
            LossKind::Squared => (a - b) * (a - b),
        }
    }

    /// Branching factor of one round: advice profiles x simplex points x
    /// outcomes.
    pub fn branching(&self) -> u64 {
        (self.advice_grid.len() as u64).pow(self.n_experts as u32)
            * self.simplex_grid.len() as u64
            * self.outcomes.len() as u64
    }

    fn naive_nodes(&self, rounds: usize) -> u64 {
        let mut total: u64 = 1;
        for _ in 0..rounds {
            total = total.saturating_mul(self.branching());
        }
        total
    }

    /// All advice profiles in deterministic (odometer) order.
    fn advice_profiles(&self) -> Vec<Vec<Rat>> {
        let mut profiles = Vec::new();
        let mut idx = vec![0usize; self.n_experts];
        loop {
            profiles.push(idx.iter().map(|&i| self.advice_grid[i]).collect());
            let mut axis = 0;
            loop {
                if axis == self.n_experts {
                    return profiles;
                }
                idx[axis] += 1;
                if idx[axis] < self.advice_grid.len() {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }

    /// Exact per-round increment vectors, indexed `[profile][p][b]`.
    fn increment_table(&self) -> Vec<Vec<Vec<Vec<Rat>>>> {
        self.advice_profiles()
            .iter()
            .map(|f| {
                self.simplex_grid
                    .iter()
                    .map(|p| {
                        let prediction: Rat = p.iter().zip(f).map(|(pi, fi)| *pi * *fi).sum();
                        self.outcomes
                            .iter()
                            .map(|&b| {
                                let own = self.loss_rat(prediction, b);
                                f.iter().map(|&fi| own - self.loss_rat(fi, b)).collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Worst-case value of the discretized game from round `t` at state `x`,
    /// memoized on the exact reachable offsets.
    pub fn minimax_value(&self, t: usize, x: &[f64]) -> Result<f64> {
        Ok(self.solve(t, x, true)?.0)
    }

    /// Same recursion with memoization disabled — the enumeration oracle.
    /// Only sensible on specs whose full tree fits the budget.
    pub fn minimax_value_enumerated(&self, t: usize, x: &[f64]) -> Result<f64> {
        Ok(self.solve(t, x, false)?.0)
    }

    /// Value plus every `(t, state, value)` row visited, sorted for
    /// deterministic export.
    pub fn minimax_value_table(&self, t: usize, x: &[f64]) -> Result<(f64, Vec<ValueRow>)> {
        let (value, dp) = self.solve(t, x, true)?;
        let inv_sqrt_n = (self.horizon as f64).sqrt().recip();
        let mut rows = Vec::new();
        for (level, states) in dp.memo.iter().enumerate() {
            let mut level_rows: Vec<ValueRow> = states
                .iter()
                .map(|(delta, &v)| ValueRow {
                    t: level,
                    x: delta
                        .iter()
                        .zip(x)
                        .map(|(d, &x0)| x0 + rat_to_f64(*d) * inv_sqrt_n)
                        .collect(),
                    value: v,
                })
                .collect();
            level_rows.sort_by(|a, b| a.x.partial_cmp(&b.x).expect("finite states"));
            rows.extend(level_rows);
        }
        Ok((value, rows))
    }

    fn solve(&self, t: usize, x: &[f64], memoize: bool) -> Result<(f64, Dp)> {
        if t > self.horizon {
            return Err(Error::Rejected(format!(
                "round {t} beyond horizon {}",
                self.horizon
            )));
        }
        if x.len() != self.n_experts {
            return Err(Error::Rejected(format!(
                "state has {} coordinates for {} experts",
                x.len(),
                self.n_experts
            )));
        }
        let increments = self.increment_table();
        let mut dp = Dp {
            memo: vec![HashMap::new(); self.horizon + 1],
            visited: 0,
            memoize,
            naive: self.naive_nodes(self.horizon - t),
            budget: self.node_budget,
        };
        let inv_sqrt_n = (self.horizon as f64).sqrt().recip();
        let delta = vec![Rat::new(0, 1); self.n_experts];
        let value = dp.value(self.horizon, &increments, t, &delta, x, inv_sqrt_n)?;
        Ok((value, dp))
    }

    /// Exhaustive worst case over advice profiles and outcomes when the
    /// forecaster plays the potential strategy — the audit chain's middle
    /// term. The infimum is gone, so no grid choice can understate it.
    pub fn potential_strategy_worst_case(
        &self,
        potential: &Potential<f64>,
        t: usize,
        x: &[f64],
    ) -> Result<f64> {
        if t > self.horizon {
            return Err(Error::Rejected(format!(
                "round {t} beyond horizon {}",
                self.horizon
            )));
        }
        if x.len() != self.n_experts {
            return Err(Error::Rejected("state dimension mismatch".into()));
        }
        let per_round =
            (self.advice_grid.len() as u64).pow(self.n_experts as u32) * self.outcomes.len() as u64;
        let mut naive: u64 = 1;
        for _ in t..self.horizon {
            naive = naive.saturating_mul(per_round);
        }
        if naive > self.node_budget {
            return Err(Error::BudgetExceeded {
                needed: naive,
                budget: self.node_budget,
            });
        }
        let loss = LossFunction::<f64>::from_kind(self.loss);
        let profiles: Vec<Vec<f64>> = self
            .advice_profiles()
            .into_iter()
            .map(|f| f.into_iter().map(rat_to_f64).collect())
            .collect();
        let outcomes: Vec<f64> = self.outcomes.iter().copied().map(rat_to_f64).collect();
        let inv_sqrt_n = (self.horizon as f64).sqrt().recip();
        self.strategy_worst(
            potential,
            &loss,
            &profiles,
            &outcomes,
            t,
            x.to_vec(),
            inv_sqrt_n,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn strategy_worst(
        &self,
        potential: &Potential<f64>,
        loss: &LossFunction<f64>,
        profiles: &[Vec<f64>],
        outcomes: &[f64],
        t: usize,
        x: Vec<f64>,
        inv_sqrt_n: f64,
    ) -> Result<f64> {
        if t == self.horizon {
            return Ok(coordinate_max(&x));
        }
        let p = potential.weights_or_uniform(&x)?;
        let mut worst = f64::NEG_INFINITY;
        for f in profiles {
            let prediction = p.dot(f)?;
            for &b in outcomes {
                let own = loss.evaluate(prediction, b)?;
                let next: Vec<f64> = x
                    .iter()
                    .zip(f)
                    .map(|(&xi, &fi)| {
                        xi + (own - loss.evaluate(fi, b).expect("grid advice in domain"))
                            * inv_sqrt_n
                    })
                    .collect();
                let v = self.strategy_worst(
                    potential,
                    loss,
                    profiles,
                    outcomes,
                    t + 1,
                    next,
                    inv_sqrt_n,
                )?;
                worst = worst.max(v);
            }
        }
        Ok(worst)
    }

    /// Run the full audit chain from the zero state.
    pub fn bound_audit(&self, potential: &Potential<f64>) -> Result<BoundAudit> {
        let x0 = vec![0.0; self.n_experts];
        let minimax_value = self.minimax_value(0, &x0)?;
        let strategy_worst_case = self.potential_strategy_worst_case(potential, 0, &x0)?;
        let bound_constant = potential.bound_constant(self.n_experts);
        let chain_holds = minimax_value <= strategy_worst_case + 1e-12
            && strategy_worst_case <= bound_constant + 1e-9;
        Ok(BoundAudit {
            minimax_value,
            strategy_worst_case,
            bound_constant,
            chain_holds,
        })
    }
}

struct Dp {
    memo: Vec<HashMap<Vec<Rat>, f64>>,
    visited: u64,
    memoize: bool,
    naive: u64,
    budget: u64,
}

impl Dp {
    fn value(
        &mut self,
        horizon: usize,
        increments: &[Vec<Vec<Vec<Rat>>>],
        t: usize,
        delta: &[Rat],
        x0: &[f64],
        inv_sqrt_n: f64,
    ) -> Result<f64> {
        if self.memoize {
            if let Some(&v) = self.memo[t].get(delta) {
                return Ok(v);
            }
        }
        if t == horizon {
            let terminal = delta
                .iter()
                .zip(x0)
                .map(|(d, &x)| x + rat_to_f64(*d) * inv_sqrt_n)
                .fold(f64::NEG_INFINITY, f64::max);
            if self.memoize {
                self.memo[t].insert(delta.to_vec(), terminal);
            }
            return Ok(terminal);
        }
        let mut best_f = f64::NEG_INFINITY;
        for per_profile in increments {
            let mut best_p = f64::INFINITY;
            for per_point in per_profile {
                let mut worst_b = f64::NEG_INFINITY;
                for increment in per_point {
                    self.visited += 1;
                    if self.visited > self.budget {
                        return Err(Error::BudgetExceeded {
                            needed: self.naive,
                            budget: self.budget,
                        });
                    }
                    let child: Vec<Rat> =
                        delta.iter().zip(increment).map(|(d, r)| *d + *r).collect();
                    let v = self.value(horizon, increments, t + 1, &child, x0, inv_sqrt_n)?;
                    worst_b = worst_b.max(v);
                }
                best_p = best_p.min(worst_b);
            }
            best_f = best_f.max(best_p);
        }
        if self.memoize {
            self.memo[t].insert(delta.to_vec(), best_f);
        }
        Ok(best_f)
    }
}

/// One exported row of the value table.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueRow {
    pub t: usize,
    pub x: Vec<f64>,
    pub value: f64,
}

/// Result of the three-term audit chain at `(t, x) = (0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundAudit {
    /// Discretized game value (grid infimum for the forecaster).
    pub minimax_value: f64,
    /// Exhaustive worst case against the implemented potential strategy.
    pub strategy_worst_case: f64,
    /// The certificate `c + phi(0)`.
    pub bound_constant: f64,
    pub chain_holds: bool,
}

/// Discretized randomized-game operator
/// `G(gamma, S) = (1/2) inf_p sup_b <S r(p,b), r(p,b)>` over the grid points
/// `p` with `<gamma, r(p,b)> <= 0` for every outcome. The normalized `gamma`
/// is appended to the grid; it is feasible by the expected-loss identity, so
/// a nonzero `gamma` always has a feasible point.
pub fn evaluate_g_randomized(
    gamma: &[f64],
    s_matrix: &[Vec<f64>],
    actions: &ActionSet<f64>,
    simplex_grid: &[WeightVector<f64>],
) -> Result<f64> {
    let n = actions.len();
    if gamma.len() != n {
        return Err(Error::Rejected("gamma dimension mismatch".into()));
    }
    if s_matrix.len() != n || s_matrix.iter().any(|row| row.len() != n) {
        return Err(Error::Rejected("matrix must be N x N".into()));
    }
    if gamma.iter().any(|&g| !g.is_finite() || g < 0.0) {
        return Err(Error::Rejected(
            "gamma must be finite and nonnegative".into(),
        ));
    }

    let mut candidates: Vec<WeightVector<f64>> = simplex_grid.to_vec();
    let gamma_sum: f64 = gamma.iter().sum();
    if gamma_sum > 0.0 {
        candidates.push(WeightVector::normalized(gamma)?);
    }

    let mut best: Option<f64> = None;
    for p in &candidates {
        if p.len() != n {
            return Err(Error::Rejected("simplex grid dimension mismatch".into()));
        }
        let mut feasible = true;
        let mut worst_b = f64::NEG_INFINITY;
        for &b in actions.outcomes() {
            let r = randomized_increment(p, b, actions)?;
            let against_gamma: f64 = gamma.iter().zip(&r).map(|(g, ri)| g * ri).sum();
            if against_gamma > f64::tol_strict() {
                feasible = false;
                break;
            }
            let form: f64 = s_matrix
                .iter()
                .zip(&r)
                .map(|(row, &ri)| ri * row.iter().zip(&r).map(|(s, rj)| s * rj).sum::<f64>())
                .sum();
            worst_b = worst_b.max(form);
        }
        if feasible {
            best = Some(match best {
                Some(v) => v.min(worst_b),
                None => worst_b,
            });
        }
    }
    match best {
        Some(v) => Ok(0.5 * v),
        None => Err(Error::Rejected(
            "no feasible grid point for the given gamma".into(),
        )),
    }
}
