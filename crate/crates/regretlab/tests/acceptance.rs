//! Acceptance suite: every guarantee the library advertises, exercised at
//! its stated tolerance. Each test prints one `acceptance: ... PASS` line
//! (run with `--nocapture` to see them); a failed assertion marks the
//! criterion red.

use std::time::{Duration, Instant};

use regretlab::forecaster::ForecasterState;
use regretlab::game::{
    run_game, sweep, AdversaryPolicy, GameConfig, GameMode, SweepParam, SweepValue,
};
use regretlab::loss::{LossFunction, LossKind};
use regretlab::minimax::DiscreteGameSpec;
use regretlab::potential::{optimal_eta, HessianScan, Potential};
use regretlab::randomized::{
    expected_regret, run_randomized, sampled_regret, ActionSet, RandomizedState,
};
use regretlab::regret::{AdviceVector, RegretVector};
use regretlab::rng::SeedStream;

const LOSSES: [LossKind; 2] = [LossKind::Absolute, LossKind::Squared];
const ADVERSARIES: [AdversaryPolicy; 2] =
    [AdversaryPolicy::ObliviousSeeded, AdversaryPolicy::Greedy];

fn matrix_config(
    n_experts: usize,
    horizon: usize,
    kind: LossKind,
    adversary: AdversaryPolicy,
    seed: u64,
) -> GameConfig<f64> {
    let mut config = GameConfig::new(horizon, n_experts);
    config.loss = LossFunction::from_kind(kind);
    config.adversary_policy = adversary;
    config.seed = seed;
    config
}

/// Regret bound: final regret <= sqrt(2 n ln N) + 1e-9 across the full
/// config matrix, each run under five seconds.
#[test]
fn criterion_regret_bound_matrix() {
    let mut worst_margin = f64::NEG_INFINITY;
    for n_experts in [2usize, 5, 10] {
        for horizon in [100usize, 10_000] {
            for kind in LOSSES {
                for adversary in ADVERSARIES {
                    let config = matrix_config(n_experts, horizon, kind, adversary, 7);
                    let started = Instant::now();
                    let t = run_game(&config).unwrap();
                    let elapsed = started.elapsed();
                    let bound = (2.0 * horizon as f64 * (n_experts as f64).ln()).sqrt();
                    assert!(
                        t.final_regret <= bound + 1e-9,
                        "bound violated: regret {} > {bound} at N={n_experts} n={horizon} {kind:?} {adversary:?}",
                        t.final_regret
                    );
                    assert!(t.bound_satisfied);
                    assert!(
                        elapsed < Duration::from_secs(5),
                        "config took {elapsed:?} at N={n_experts} n={horizon}"
                    );
                    worst_margin = worst_margin.max(t.final_regret - bound);
                }
            }
        }
    }
    println!(
        "acceptance: regret bound over 24-config matrix (worst regret-bound gap {worst_margin:.3e}) PASS"
    );
}

/// Blackwell and telescoping inequalities stay under 1e-12 on every one of
/// more than a million simulated rounds across the matrix.
#[test]
fn criterion_blackwell_and_telescoping_per_round() {
    let mut max_blackwell = f64::NEG_INFINITY;
    let mut max_telescoping = f64::NEG_INFINITY;
    let mut rounds: u64 = 0;
    for n_experts in [2usize, 5, 10] {
        for horizon in [100usize, 10_000] {
            // extra seeds on the long games push the total over one million
            let seeds: &[u64] = if horizon == 10_000 {
                &[0, 1, 2, 3, 4, 5, 6, 7, 8]
            } else {
                &[0]
            };
            for kind in LOSSES {
                for adversary in ADVERSARIES {
                    for &seed in seeds {
                        let config = matrix_config(n_experts, horizon, kind, adversary, seed);
                        let t = run_game(&config).unwrap();
                        match &t.rounds {
                            regretlab::game::TranscriptRounds::Averaged(records) => {
                                for r in records {
                                    max_blackwell = max_blackwell.max(r.blackwell_value);
                                    max_telescoping = max_telescoping.max(r.telescoping_value);
                                    rounds += 1;
                                }
                            }
                            _ => unreachable!("averaged matrix"),
                        }
                    }
                }
            }
        }
    }
    assert!(rounds >= 1_000_000, "only {rounds} rounds simulated");
    assert!(max_blackwell <= 1e-12, "max blackwell {max_blackwell:e}");
    assert!(
        max_telescoping <= 1e-12,
        "max telescoping {max_telescoping:e}"
    );
    println!("acceptance: Blackwell <= 1e-12 over {rounds} rounds (max {max_blackwell:.3e}) PASS");
    println!(
        "acceptance: telescoping <= 1e-12 over {rounds} rounds (max {max_telescoping:.3e}) PASS"
    );
}

/// Hessian certificate at c = eta/2: vertex scan over the sign box at 200
/// sample points for N in 2..=10; halving the constant is detected.
#[test]
fn criterion_hessian_certificate() {
    let mut worst_excess = f64::NEG_INFINITY;
    for n in 2usize..=10 {
        let eta = optimal_eta::<f64>(n);
        let mut rng = SeedStream::new(n as u64).split(4);
        let mut points: Vec<RegretVector<f64>> = (0..199)
            .map(|_| RegretVector::new((0..n).map(|_| rng.next_gaussian()).collect()).unwrap())
            .collect();
        // include the near-uniform softmax point where the form peaks
        points.push(RegretVector::zeros(n));

        let good = Potential::exponential(eta).unwrap();
        let report = good
            .certify_supersolution(&points, 0, HessianScan::Vertices)
            .unwrap();
        assert_eq!(report.points_checked, 200);
        assert!(
            report.max_hessian_excess <= 1e-12,
            "N={n}: excess {:e}",
            report.max_hessian_excess
        );
        assert!(report.passed);
        worst_excess = worst_excess.max(report.max_hessian_excess);

        let broken = Potential::exponential_with_constant(eta, eta / 4.0).unwrap();
        let broken_report = broken
            .certify_supersolution(&points, 0, HessianScan::Vertices)
            .unwrap();
        assert!(!broken_report.passed, "N={n}: c=eta/4 not detected");
        assert!(broken_report.max_hessian_excess > 1e-12);
    }
    println!(
        "acceptance: Hessian certificate c=eta/2 for N=2..=10 (worst excess {worst_excess:.3e}), c=eta/4 detected PASS"
    );
}

/// Analytic softmax gradient against central finite differences at 1000
/// random points, relative error <= 1e-6.
#[test]
fn criterion_gradient_finite_differences() {
    let mut worst = 0.0f64;
    let mut rng = SeedStream::new(55);
    for i in 0..1000 {
        let n = 2 + i % 9;
        let eta = optimal_eta::<f64>(n);
        let potential = Potential::exponential(eta).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rng.next_gaussian::<f64>()).collect();
        let grad = potential.gradient(&x);
        let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let step = 1e-6;
        let mut probe = x.clone();
        for j in 0..n {
            probe[j] = x[j] + step;
            let up = potential.value(&probe);
            probe[j] = x[j] - step;
            let down = potential.value(&probe);
            probe[j] = x[j];
            let fd = (up - down) / (2.0 * step);
            worst = worst.max((grad[j] - fd).abs() / scale);
        }
    }
    assert!(worst <= 1e-6, "worst relative error {worst:e}");
    println!("acceptance: gradient vs finite differences at 1000 points (worst {worst:.3e}) PASS");
}

/// Gradient weights agree with the cumulative-loss softmax weights within
/// 1e-9 on every round of a 10^4-round game.
#[test]
fn criterion_representation_equivalence() {
    let n_experts = 5;
    let horizon = 10_000;
    let loss = LossFunction::<f64>::absolute();
    let mut state = ForecasterState::new(
        horizon,
        n_experts,
        Potential::exponential_optimal(n_experts),
        loss.clone(),
    )
    .unwrap();
    let mut rng = SeedStream::new(12);
    let mut worst = 0.0f64;
    for _ in 0..horizon {
        let advice = AdviceVector::new(
            (0..n_experts).map(|_| rng.next_in(0.0, 1.0)).collect(),
            &loss,
        )
        .unwrap();
        let b = if rng.next_unit::<f64>() < 0.5 {
            0.0
        } else {
            1.0
        };
        let (next, _) = state.observe(&advice, b).unwrap();
        let by_gradient = next.potential().weights(next.regrets().as_slice()).unwrap();
        let by_loss = next.loss_softmax_weights().unwrap();
        for (a, c) in by_gradient.iter().zip(by_loss.iter()) {
            worst = worst.max((a - c).abs());
        }
        state = next;
    }
    assert!(worst <= 1e-9, "weights diverged by {worst:e}");
    println!(
        "acceptance: gradient vs cumulative-loss weights over 10^4 rounds (worst {worst:.3e}) PASS"
    );
}

/// Minimax oracle chain for N=2, n in 1..=4 on the standard grids:
/// discretized game value <= potential strategy worst case
/// <= sqrt(2 ln 2) + 1e-9, each audit under a minute. The memoized and
/// enumerated oracles agree exactly where the full tree is enumerable, and
/// the one-round value is the hand-checkable 1/2.
#[test]
fn criterion_minimax_audit_chain() {
    let sqrt_2ln2 = (2.0 * 2f64.ln()).sqrt();
    for kind in LOSSES {
        let potential = Potential::<f64>::exponential_optimal(2);
        for horizon in 1..=4usize {
            let spec = DiscreteGameSpec::standard(horizon, 2, kind).unwrap();
            let started = Instant::now();
            let audit = spec.bound_audit(&potential).unwrap();
            let elapsed = started.elapsed();
            assert!(
                audit.minimax_value <= audit.strategy_worst_case + 1e-12,
                "{kind:?} n={horizon}: v={} > w*={}",
                audit.minimax_value,
                audit.strategy_worst_case
            );
            assert!(
                audit.strategy_worst_case <= sqrt_2ln2 + 1e-9,
                "{kind:?} n={horizon}: w*={} above sqrt(2 ln 2)",
                audit.strategy_worst_case
            );
            assert!(audit.chain_holds);
            assert!(
                elapsed < Duration::from_secs(60),
                "{kind:?} n={horizon} took {elapsed:?}"
            );
            println!(
                "acceptance: minimax chain {kind:?} n={horizon}: {:.6} <= {:.6} <= {:.6} PASS",
                audit.minimax_value, audit.strategy_worst_case, sqrt_2ln2
            );
        }
    }
    // spot checks: enumerated oracle agreement and the hand-derived value
    let one_round = DiscreteGameSpec::standard(1, 2, LossKind::Absolute).unwrap();
    let memo = one_round.minimax_value(0, &[0.0, 0.0]).unwrap();
    let brute = one_round.minimax_value_enumerated(0, &[0.0, 0.0]).unwrap();
    assert_eq!(memo, brute);
    assert_eq!(memo, 0.5);
    let two_round = DiscreteGameSpec::standard(2, 2, LossKind::Absolute).unwrap();
    assert_eq!(
        two_round.minimax_value(0, &[0.0, 0.0]).unwrap(),
        two_round.minimax_value_enumerated(0, &[0.0, 0.0]).unwrap()
    );
}

/// Randomized mode: expected regret bounded on 100 oblivious streams for
/// N in {2, 5} at n = 10^4; Monte-Carlo sampled regret agrees with the
/// expected regret within three standard errors over 1000 seeded replays;
/// the non-convex action fixture obeys the same bound.
#[test]
fn criterion_randomized_mode() {
    let horizon = 10_000;
    for n_actions in [2usize, 5] {
        let bound = (2.0 * horizon as f64 * (n_actions as f64).ln()).sqrt();
        for stream_seed in 0..100u64 {
            let mut config = GameConfig::<f64>::new(horizon, n_actions);
            config.mode = GameMode::Randomized;
            config.adversary_policy = AdversaryPolicy::ObliviousSeeded;
            config.seed = stream_seed;
            let t = run_game(&config).unwrap();
            assert!(
                t.final_regret <= bound + 1e-9,
                "N={n_actions} seed={stream_seed}: expected regret {} > {bound}",
                t.final_regret
            );
        }
    }
    println!("acceptance: randomized expected regret <= sqrt(2 n ln N) on 200 streams PASS");

    // Monte-Carlo agreement on one fixed outcome stream
    let n_actions = 2;
    let actions = ActionSet::from_loss(vec![0.0, 1.0], &LossFunction::absolute()).unwrap();
    let mut stream_rng = SeedStream::new(424242);
    let outcomes: Vec<f64> = (0..horizon)
        .map(|_| {
            if stream_rng.next_unit::<f64>() < 0.5 {
                0.0
            } else {
                1.0
            }
        })
        .collect();
    let potential = Potential::<f64>::exponential_optimal(n_actions);
    let expected = {
        let state = RandomizedState::new(horizon, potential.clone(), actions.clone()).unwrap();
        let mut rng = SeedStream::new(0);
        let (rounds, _) = run_randomized(state, &outcomes, &mut rng).unwrap();
        expected_regret(&rounds, &actions)
    };
    let replays = 1000;
    let samples: Vec<f64> = (0..replays)
        .map(|seed| {
            let state = RandomizedState::new(horizon, potential.clone(), actions.clone()).unwrap();
            let mut rng = SeedStream::new(seed);
            let (rounds, _) = run_randomized(state, &outcomes, &mut rng).unwrap();
            sampled_regret(&rounds, &actions)
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / replays as f64;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (replays - 1) as f64;
    let se = (var / replays as f64).sqrt();
    assert!(
        (mean - expected).abs() <= 3.0 * se,
        "MC mean {mean} vs expected {expected} (3se {:.4})",
        3.0 * se
    );
    println!(
        "acceptance: Monte-Carlo sampled regret mean {mean:.4} within 3se of expected {expected:.4} PASS"
    );

    // non-convex fixture: the bound needs no convexity
    let fixture = ActionSet::non_convex_demo();
    let bound = (2.0 * horizon as f64 * 3f64.ln()).sqrt();
    for stream_seed in 0..100u64 {
        let mut config = GameConfig::<f64>::new(horizon, fixture.len());
        config.mode = GameMode::Randomized;
        config.adversary_policy = AdversaryPolicy::ObliviousSeeded;
        config.action_set = Some(fixture.clone());
        config.seed = stream_seed;
        let t = run_game(&config).unwrap();
        assert!(
            t.final_regret <= bound + 1e-9,
            "non-convex seed={stream_seed}: {} > {bound}",
            t.final_regret
        );
    }
    println!("acceptance: non-convex fixture expected regret bounded on 100 streams PASS");
}

/// The eta trade-off: on a 0.01-step grid the bound `(eta/2 + ln N / eta)`
/// is minimized within one step of sqrt(2 ln N), for N in {2, 4, 16}.
#[test]
fn criterion_eta_tradeoff() {
    for n_experts in [2usize, 4, 16] {
        let mut base = GameConfig::<f64>::new(25, n_experts);
        base.adversary_policy = AdversaryPolicy::ObliviousSeeded;
        let etas: Vec<f64> = (50..=300).map(|k| k as f64 * 0.01).collect();
        let rows = sweep(&base, &SweepParam::Eta(etas)).unwrap();
        let best = rows
            .iter()
            .min_by(|a, b| a.bound.partial_cmp(&b.bound).unwrap())
            .unwrap();
        let best_eta = match best.param {
            SweepValue::Eta(eta) => eta,
            _ => unreachable!(),
        };
        let target = optimal_eta::<f64>(n_experts);
        assert!(
            (best_eta - target).abs() <= 0.01 + 1e-12,
            "N={n_experts}: best eta {best_eta} vs sqrt(2 ln N) = {target}"
        );
        println!(
            "acceptance: eta sweep N={n_experts} minimized at {best_eta:.2} (target {target:.4}) PASS"
        );
    }
}
