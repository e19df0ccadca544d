//! Sandwich the implemented strategy between the exact game value and its
//! certificate on tiny discretized games:
//!
//! ```text
//! minimax value <= strategy worst case <= c + phi(0)
//! ```
//!
//! Run with `cargo run --release --example bound_audit`.

use regretlab::loss::LossKind;
use regretlab::minimax::DiscreteGameSpec;
use regretlab::potential::Potential;

fn main() {
    let potential = Potential::<f64>::exponential_optimal(2);
    println!("loss      n  minimax      strategy     c + phi(0)");
    for loss in [LossKind::Absolute, LossKind::Squared] {
        for horizon in 1..=4usize {
            let spec = DiscreteGameSpec::standard(horizon, 2, loss).expect("desk-scale spec");
            let audit = spec.bound_audit(&potential).expect("within budget");
            println!(
                "{loss:<9?} {horizon}  {:<12.9} {:<12.9} {:<12.9} {}",
                audit.minimax_value,
                audit.strategy_worst_case,
                audit.bound_constant,
                if audit.chain_holds { "ok" } else { "VIOLATED" },
            );
        }
    }
}
