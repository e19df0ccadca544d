//! `regretlab` — simulate prediction games, certify potentials, audit the
//! regret bound against a brute-force minimax oracle, and sweep parameters.
//!
//! Exit codes: 0 success / bounds hold, 1 verification failed, 2 invalid
//! input, 3 runtime invariant violation. All randomness flows from `--seed`
//! (default 0), so identical invocations produce byte-identical output.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use regretlab::error::Error;
use regretlab::game::{
    run_game_streaming, sweep, AdversaryPolicy, ExpertPolicy, GameConfig, GameMode, SweepParam,
};
use regretlab::loss::{LossFunction, LossKind};
use regretlab::minimax::{rat_from_decimal, DiscreteGameSpec, Rat};
use regretlab::potential::{HessianScan, Potential, PotentialSpec};
use regretlab::randomized::ActionSet;
use regretlab::regret::RegretVector;
use regretlab::rng::SeedStream;
use regretlab::transcript;

const EXIT_OK: u8 = 0;
const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "regretlab",
    version,
    about = "Potential-based forecasting: simulator, certificates, minimax audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one prediction game; write the transcript and a summary line.
    Simulate(SimulateArgs),
    /// Check a potential's supersolution certificate numerically.
    VerifyPotential(VerifyArgs),
    /// Audit the bound chain against the discretized game oracle.
    Minimax(MinimaxArgs),
    /// Run one game per parameter value; print a CSV table.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Debug)]
#[serde(rename_all = "kebab-case")]
enum LossArg {
    Absolute,
    Squared,
    /// Non-convex 3-action fixture (randomized mode only).
    NonConvex,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Debug)]
#[serde(rename_all = "kebab-case")]
enum AdversaryArg {
    Oblivious,
    Greedy,
    Lookahead,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Debug)]
#[serde(rename_all = "kebab-case")]
enum ExpertArg {
    Random,
    Grid,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Debug)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    Averaged,
    Randomized,
}

/// Run-spec file: every field optional, unknown keys rejected. Flags
/// override file fields.
#[derive(Deserialize, Default, Debug)]
#[serde(deny_unknown_fields)]
struct RunSpec {
    n: Option<usize>,
    experts: Option<usize>,
    loss: Option<LossArg>,
    adversary: Option<AdversaryArg>,
    lookahead_depth: Option<usize>,
    expert_policy: Option<ExpertArg>,
    advice_table: Option<Vec<Vec<f64>>>,
    eta: Option<f64>,
    c: Option<f64>,
    mode: Option<ModeArg>,
    seed: Option<u64>,
    out: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON run-spec file; command-line flags take precedence.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Horizon (number of rounds).
    #[arg(long)]
    n: Option<usize>,
    /// Number of experts (actions in randomized mode).
    #[arg(long)]
    experts: Option<usize>,
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    #[arg(long, value_enum)]
    adversary: Option<AdversaryArg>,
    /// Lookahead depth for `--adversary lookahead`.
    #[arg(long)]
    lookahead_depth: Option<usize>,
    #[arg(long, value_enum)]
    expert_policy: Option<ExpertArg>,
    /// Learning rate; defaults to sqrt(2 ln N).
    #[arg(long)]
    eta: Option<f64>,
    /// Hessian constant override; defaults to eta/2.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Transcript output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn invalid(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INVALID)
}

fn map_run_error(err: Error) -> ExitCode {
    match err {
        Error::InvariantViolation {
            round,
            check,
            value,
        } => {
            eprintln!("error: invariant violated at round {round}: {check} = {value:e}");
            ExitCode::from(EXIT_INVARIANT)
        }
        other => invalid(other),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> ExitCode {
    let spec = match &args.spec {
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => return invalid(format!("cannot read {}: {e}", path.display())),
            };
            match serde_json::from_str::<RunSpec>(&text) {
                Ok(s) => s,
                Err(e) => return invalid(format!("bad run spec: {e}")),
            }
        }
        None => RunSpec::default(),
    };

    let horizon = args.n.or(spec.n).unwrap_or(100);
    let experts = args.experts.or(spec.experts).unwrap_or(2);
    let loss = args.loss.or(spec.loss).unwrap_or(LossArg::Absolute);
    let adversary = args
        .adversary
        .or(spec.adversary)
        .unwrap_or(AdversaryArg::Greedy);
    let depth = args.lookahead_depth.or(spec.lookahead_depth).unwrap_or(1);
    let expert_policy = args.expert_policy.or(spec.expert_policy);
    let mode = args.mode.or(spec.mode).unwrap_or(ModeArg::Averaged);
    let seed = args.seed.or(spec.seed).unwrap_or(0);
    let out = args
        .out
        .clone()
        .or_else(|| spec.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("transcript.txt"));

    if horizon == 0 {
        return invalid("horizon must be at least 1");
    }

    let mut config = GameConfig::<f64>::new(horizon, experts);
    config.seed = seed;
    config.mode = match mode {
        ModeArg::Averaged => GameMode::Averaged,
        ModeArg::Randomized => GameMode::Randomized,
    };
    config.loss = match loss {
        LossArg::Absolute => LossFunction::absolute(),
        LossArg::Squared => LossFunction::squared(),
        LossArg::NonConvex => {
            if config.mode != GameMode::Randomized {
                return invalid("the non-convex loss fixture requires --mode randomized");
            }
            let fixture = ActionSet::non_convex_demo();
            if args.experts.or(spec.experts).is_some() && experts != fixture.len() {
                return invalid(format!(
                    "the non-convex fixture has exactly {} actions",
                    fixture.len()
                ));
            }
            config.n_experts = fixture.len();
            config.action_set = Some(fixture);
            LossFunction::absolute()
        }
    };
    config.adversary_policy = match adversary {
        AdversaryArg::Oblivious => AdversaryPolicy::ObliviousSeeded,
        AdversaryArg::Greedy => AdversaryPolicy::Greedy,
        AdversaryArg::Lookahead => AdversaryPolicy::MinimaxLookahead { depth },
    };
    if let Some(rows) = spec.advice_table {
        config.expert_policy = ExpertPolicy::FixedTable { rows };
    }
    if let Some(policy) = expert_policy {
        config.expert_policy = match policy {
            ExpertArg::Random => ExpertPolicy::SeededRandom,
            ExpertArg::Grid => ExpertPolicy::ConstantGrid,
        };
    }
    let eta = args.eta.or(spec.eta);
    let c = args.c.or(spec.c);
    config.potential = PotentialSpec::Exponential { eta, c };

    if let Err(e) = config.validate() {
        return invalid(e);
    }

    let file = match fs::File::create(&out) {
        Ok(f) => f,
        Err(e) => return invalid(format!("cannot create {}: {e}", out.display())),
    };
    let mut writer = BufWriter::new(file);
    if let Err(e) = transcript::write_header(&mut writer, &config) {
        return invalid(format!("cannot write transcript: {e}"));
    }
    let outcome = run_game_streaming(&config, |event| {
        transcript::write_round(&mut writer, event)
            .map_err(|e| Error::Rejected(format!("cannot write transcript: {e}")))
    });
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => return map_run_error(e),
    };
    if let Err(e) = writer.flush() {
        return invalid(format!("cannot write transcript: {e}"));
    }

    println!(
        "regret={} bound={} satisfied={}",
        outcome.final_regret, outcome.bound_value, outcome.bound_satisfied
    );
    if outcome.bound_satisfied {
        ExitCode::from(EXIT_OK)
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PotentialKindArg {
    Exponential,
    /// Same soft maximum through the composite psi/phi code path.
    CompositeExp,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "exponential")]
    kind: PotentialKindArg,
    /// Learning rate; defaults to sqrt(2 ln N).
    #[arg(long)]
    eta: Option<f64>,
    /// Claimed Hessian constant; defaults to eta/2.
    #[arg(long)]
    c: Option<f64>,
    /// Dimension (number of experts).
    #[arg(long, default_value_t = 2)]
    experts: usize,
    /// Standard-normal sample points to check.
    #[arg(long, default_value_t = 200)]
    samples: usize,
    /// Axis grid resolution over [-3,3]^N (0 disables the grid).
    #[arg(long, default_value_t = 0)]
    grid: usize,
    /// Use this many sampled box directions instead of the vertex scan
    /// (required above 20 dimensions).
    #[arg(long)]
    sampled_h: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn cmd_verify_potential(args: &VerifyArgs) -> ExitCode {
    if args.experts == 0 {
        return invalid("need at least one expert");
    }
    if args.samples == 0 {
        return invalid("need at least one sample point");
    }
    let eta = args
        .eta
        .unwrap_or_else(|| regretlab::potential::optimal_eta::<f64>(args.experts));
    let built = match args.kind {
        PotentialKindArg::Exponential => match args.c {
            Some(c) => Potential::exponential_with_constant(eta, c),
            None => Potential::exponential(eta),
        },
        PotentialKindArg::CompositeExp => {
            if args.c.is_some() {
                return invalid("--c only applies to --kind exponential");
            }
            Potential::composite_exponential(eta)
        }
    };
    let potential = match built {
        Ok(p) => p,
        Err(e) => return invalid(e),
    };

    let mut rng = SeedStream::new(args.seed).split(0x7665_7269);
    let points: Vec<RegretVector<f64>> = (0..args.samples)
        .map(|_| {
            RegretVector::new((0..args.experts).map(|_| rng.next_gaussian()).collect())
                .expect("gaussian draws are finite")
        })
        .collect();
    let scan = match args.sampled_h {
        Some(directions) => HessianScan::Sampled {
            directions,
            seed: args.seed,
        },
        None => HessianScan::Vertices,
    };
    let report = match potential.certify_supersolution(&points, args.grid, scan) {
        Ok(r) => r,
        Err(Error::BudgetExceeded { needed, budget }) => {
            return invalid(format!(
                "vertex scan needs {needed} sign vertices (budget {budget}); pass --sampled-h"
            ))
        }
        Err(e) => return invalid(e),
    };

    println!("points_checked={}", report.points_checked);
    println!(
        "max_domination_violation={}",
        report.max_domination_violation
    );
    println!("max_hessian_excess={}", report.max_hessian_excess);
    println!("min_gradient_entry={}", report.min_gradient_entry);
    println!(
        "gradient_check_max_relerror={}",
        report.gradient_check_max_relerror
    );
    println!("passed={}", report.passed);
    if report.passed {
        ExitCode::from(EXIT_OK)
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

#[derive(Args)]
struct MinimaxArgs {
    /// Horizon (1..=6).
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Experts (1..=3).
    #[arg(long, default_value_t = 2)]
    experts: usize,
    /// Advice grid as comma-separated exact decimals.
    #[arg(long, default_value = "0,0.5,1")]
    advice_grid: String,
    /// Simplex grid spacing denominator (points k/d).
    #[arg(long, default_value_t = 20)]
    simplex_step: u32,
    /// Outcome set as comma-separated exact decimals.
    #[arg(long, default_value = "0,1")]
    outcomes: String,
    #[arg(long, value_enum, default_value = "absolute")]
    loss: LossArg,
    /// Learning rate; defaults to sqrt(2 ln N).
    #[arg(long)]
    eta: Option<f64>,
    /// Write the value table here ('-' for stdout).
    #[arg(long)]
    table: Option<String>,
}

fn parse_rats(csv: &str) -> Result<Vec<Rat>, Error> {
    csv.split(',').map(rat_from_decimal).collect()
}

fn cmd_minimax(args: &MinimaxArgs) -> ExitCode {
    let loss = match args.loss {
        LossArg::Absolute => LossKind::Absolute,
        LossArg::Squared => LossKind::Squared,
        LossArg::NonConvex => {
            return invalid("the minimax oracle needs a pointwise loss (absolute or squared)")
        }
    };
    let advice_grid = match parse_rats(&args.advice_grid) {
        Ok(g) => g,
        Err(e) => return invalid(e),
    };
    let outcomes = match parse_rats(&args.outcomes) {
        Ok(g) => g,
        Err(e) => return invalid(e),
    };
    if args.simplex_step == 0 {
        return invalid("simplex step denominator must be positive");
    }
    let spec = match DiscreteGameSpec::new(
        args.n,
        args.experts,
        advice_grid,
        regretlab::minimax::rational_simplex_grid(args.experts, args.simplex_step),
        outcomes,
        loss,
    ) {
        Ok(s) => s,
        Err(e) => return invalid(e),
    };
    let eta = args
        .eta
        .unwrap_or_else(|| regretlab::potential::optimal_eta::<f64>(args.experts));
    let potential = match Potential::exponential(eta) {
        Ok(p) => p,
        Err(e) => return invalid(e),
    };

    let audit = match spec.bound_audit(&potential) {
        Ok(a) => a,
        Err(e @ Error::BudgetExceeded { .. }) => return invalid(e),
        Err(e) => return map_run_error(e),
    };
    println!("minimax_value={}", audit.minimax_value);
    println!("strategy_worst_case={}", audit.strategy_worst_case);
    println!("bound_constant={}", audit.bound_constant);
    println!("chain_holds={}", audit.chain_holds);

    if let Some(target) = &args.table {
        let (_, rows) = match spec.minimax_value_table(0, &vec![0.0; args.experts]) {
            Ok(r) => r,
            Err(e) => return map_run_error(e),
        };
        let mut text = String::new();
        for row in rows {
            text.push_str(&row.t.to_string());
            for x in &row.x {
                text.push(',');
                text.push_str(&x.to_string());
            }
            text.push(',');
            text.push_str(&row.value.to_string());
            text.push('\n');
        }
        if target == "-" {
            print!("{text}");
        } else if let Err(e) = fs::write(target, text) {
            return invalid(format!("cannot write {target}: {e}"));
        }
    }

    if audit.chain_holds {
        ExitCode::from(EXIT_OK)
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepParamArg {
    Eta,
    Experts,
    Horizon,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    param: SweepParamArg,
    /// Comma-separated values of the swept parameter.
    #[arg(long)]
    values: String,
    /// Base horizon.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Base expert count.
    #[arg(long, default_value_t = 2)]
    experts: usize,
    #[arg(long, value_enum, default_value = "absolute")]
    loss: LossArg,
    #[arg(long, value_enum, default_value = "greedy")]
    adversary: AdversaryArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn cmd_sweep(args: &SweepArgs) -> ExitCode {
    let values: Vec<&str> = args
        .values
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if values.is_empty() {
        return invalid("sweep needs at least one value");
    }

    let mut base = GameConfig::<f64>::new(args.n, args.experts);
    base.seed = args.seed;
    base.loss = match args.loss {
        LossArg::Absolute => LossFunction::absolute(),
        LossArg::Squared => LossFunction::squared(),
        LossArg::NonConvex => return invalid("sweeps use the built-in pointwise losses"),
    };
    base.adversary_policy = match args.adversary {
        AdversaryArg::Oblivious => AdversaryPolicy::ObliviousSeeded,
        AdversaryArg::Greedy => AdversaryPolicy::Greedy,
        AdversaryArg::Lookahead => AdversaryPolicy::MinimaxLookahead { depth: 1 },
    };

    let param = match args.param {
        SweepParamArg::Eta => {
            let mut etas = Vec::new();
            for v in &values {
                match v.parse::<f64>() {
                    Ok(eta) => etas.push(eta),
                    Err(_) => return invalid(format!("bad eta value '{v}'")),
                }
            }
            SweepParam::Eta(etas)
        }
        SweepParamArg::Experts => {
            let mut ns = Vec::new();
            for v in &values {
                match v.parse::<usize>() {
                    Ok(n) => ns.push(n),
                    Err(_) => return invalid(format!("bad expert count '{v}'")),
                }
            }
            SweepParam::Experts(ns)
        }
        SweepParamArg::Horizon => {
            let mut ns = Vec::new();
            for v in &values {
                match v.parse::<usize>() {
                    Ok(n) => ns.push(n),
                    Err(_) => return invalid(format!("bad horizon '{v}'")),
                }
            }
            SweepParam::Horizon(ns)
        }
    };

    let rows = match sweep(&base, &param) {
        Ok(r) => r,
        Err(e) => return map_run_error(e),
    };
    println!("param,regret,bound");
    let mut all_hold = true;
    for row in rows {
        println!("{},{},{}", row.param, row.regret, row.bound);
        all_hold &= row.regret <= row.bound + 1e-9;
    }
    if all_hold {
        ExitCode::from(EXIT_OK)
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::VerifyPotential(args) => cmd_verify_potential(args),
        Command::Minimax(args) => cmd_minimax(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}
