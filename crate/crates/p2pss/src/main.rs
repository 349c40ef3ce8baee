//! Command-line front end: `run` one experiment, `sweep` a parameter, or
//! `plan` a (counters, rounds) budget. All heavy lifting lives in the
//! library; this binary only parses flags, resolves the configuration
//! layers (defaults < config file < flags) and writes CSV.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use p2pss::error::Error;
use p2pss::experiment::{self, ExperimentConfig, SweepParam};
use p2pss::planner::{self, Plan, PlanInputs, Strategy};

#[derive(Parser)]
#[command(name = "p2pss", version, about = "Gossip-based frequent-items mining simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and emit per-peer and aggregate metrics as CSV.
    Run(RunArgs),
    /// Run the experiment once per parameter value, with shared seeds.
    Sweep(SweepArgs),
    /// Compute a (counters, rounds) budget for a target tolerance.
    Plan(PlanArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat key=value config file; flags override file entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Global stream length.
    #[arg(long)]
    n: Option<u64>,
    /// Universe size (items are 32-bit unsigned integers in 1..=universe).
    #[arg(long)]
    universe: Option<u32>,
    /// Zipf exponent of the generated stream.
    #[arg(long, alias = "rho")]
    skew: Option<f64>,
    #[arg(long)]
    peers: Option<usize>,
    /// Counters per peer summary.
    #[arg(long)]
    k: Option<usize>,
    /// Gossip rounds.
    #[arg(long)]
    rounds: Option<u32>,
    /// Neighbors contacted per round: a count or ALL.
    #[arg(long)]
    fanout: Option<String>,
    /// Frequent-item threshold.
    #[arg(long)]
    phi: Option<f64>,
    /// Failure probability of the error bounds.
    #[arg(long)]
    delta: Option<f64>,
    /// Upper bound on the peer count (defaults to the actual count).
    #[arg(long)]
    p_star: Option<u64>,
    /// Overlay: ba:<attach>, er:<edge_prob>, or complete.
    #[arg(long)]
    topology: Option<String>,
    /// Availability: none, failstop:<prob>, yao:pareto, yao:exp.
    #[arg(long)]
    churn: Option<String>,
    /// Stream split: contiguous, roundrobin, shuffled:<seed>,
    /// adversarial:<item>.
    #[arg(long)]
    partition: Option<String>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Base seed; repetition i runs with seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Track exact per-peer frequency vectors (small runs only).
    #[arg(long)]
    ghost: bool,
    /// Query a single peer instead of every online peer.
    #[arg(long)]
    query_peer: Option<u32>,
    /// Write metrics CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-round traces (sums, variance, online count) as CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut config = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
            config.apply_file(&text)?;
        }
        if let Some(n) = self.n {
            config.n = n;
        }
        if let Some(universe) = self.universe {
            config.universe = universe;
        }
        if let Some(skew) = self.skew {
            config.skew = skew;
        }
        if let Some(peers) = self.peers {
            config.peers = peers;
        }
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(rounds) = self.rounds {
            config.rounds = rounds;
        }
        if let Some(fanout) = &self.fanout {
            config.fanout = fanout.parse().map_err(Error::InvalidConfig)?;
        }
        if let Some(phi) = self.phi {
            config.phi = phi;
        }
        if let Some(delta) = self.delta {
            config.delta = delta;
        }
        if let Some(p_star) = self.p_star {
            config.p_star = Some(p_star);
        }
        if let Some(topology) = &self.topology {
            config.topology = experiment::parse_topology(topology)?;
        }
        if let Some(churn) = &self.churn {
            config.churn = experiment::parse_churn(churn)?;
        }
        if let Some(partition) = &self.partition {
            config.partition = experiment::parse_partition(partition)?;
        }
        if let Some(repetitions) = self.repetitions {
            config.repetitions = repetitions;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if self.ghost {
            config.ghost = true;
        }
        if let Some(peer) = self.query_peer {
            config.query_peer = Some(peer);
        }
        Ok(config)
    }

    fn write_output(&self, csv: &[u8]) -> Result<(), Error> {
        match &self.out {
            Some(path) => fs::write(path, csv)?,
            None => std::io::stdout().write_all(csv)?,
        }
        Ok(())
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// rho, phi, peers, k, rounds, fanout, or fail_prob.
    #[arg(long)]
    param: String,
    /// Comma-separated values, e.g. 20,22,24 or 1,2,ALL for fanout.
    #[arg(long, value_delimiter = ',')]
    values: Vec<String>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    phi: f64,
    /// Target false-positive tolerance, 0 < eps < phi.
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long)]
    p_star: u64,
    /// Convergence factor of the schedule; defaults to 1/(2 sqrt(e)).
    #[arg(long)]
    conv_factor: Option<f64>,
    /// time-dominant (fewest rounds) or space-dominant (fewest counters).
    #[arg(long, default_value = "time-dominant")]
    strategy: String,
    /// Evaluate an explicit counter budget instead of planning one.
    #[arg(long)]
    k: Option<usize>,
    /// Evaluate an explicit round budget instead of planning one.
    #[arg(long)]
    rounds: Option<u32>,
}

fn cmd_run(args: &RunArgs) -> Result<(), Error> {
    let config = args.config.resolve()?;
    let result = experiment::run_single(&config)?;
    let mut csv = Vec::new();
    experiment::write_csv(&mut csv, &result)?;
    args.config.write_output(&csv)?;
    if let Some(path) = &args.config.trace_out {
        let mut trace_csv = Vec::new();
        experiment::write_trace_csv(&mut trace_csv, &result)?;
        fs::write(path, trace_csv)?;
    }
    report_skips(&result);
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Error> {
    let config = args.config.resolve()?;
    let param: SweepParam = args.param.parse()?;
    let blocks = experiment::run_sweep(&config, param, &args.values)?;
    let mut csv = Vec::new();
    experiment::write_sweep_csv(&mut csv, param, &blocks)?;
    args.config.write_output(&csv)?;
    for block in &blocks {
        report_skips(&block.result);
    }
    Ok(())
}

fn report_skips(result: &experiment::ExperimentResult) {
    let skipped = result.total_skipped();
    if skipped > 0 {
        eprintln!(
            "note: {skipped} peer queries were skipped (unreached or stale peers under churn)"
        );
    }
}

fn cmd_plan(args: &PlanArgs) -> Result<(), Error> {
    let mut inputs = PlanInputs::new(args.phi, args.eps, args.delta, args.p_star);
    if let Some(c) = args.conv_factor {
        inputs.conv_factor = c;
    }
    inputs.validate()?;
    let plan = match (args.k, args.rounds) {
        (Some(k), Some(rounds)) => {
            let achieved = planner::tolerance(k, rounds, &inputs);
            Plan {
                k,
                rounds,
                strategy: Strategy::Explicit,
                achieved_tolerance: achieved,
            }
        }
        (None, Some(rounds)) => {
            let k = planner::k_for_rounds(&inputs, rounds)?;
            Plan {
                k,
                rounds,
                strategy: Strategy::Explicit,
                achieved_tolerance: planner::tolerance(k, rounds, &inputs),
            }
        }
        (Some(_), None) => {
            return Err(Error::InvalidConfig(
                "--k without --rounds is ambiguous; give --rounds too".into(),
            ));
        }
        (None, None) => match args.strategy.as_str() {
            "time-dominant" | "time" => planner::time_dominant_plan(&inputs)?,
            "space-dominant" | "space" => planner::space_dominant_plan(&inputs),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown strategy {other:?} (expected time-dominant or space-dominant)"
                )));
            }
        },
    };
    if plan.achieved_tolerance > inputs.eps {
        eprintln!(
            "warning: achieved tolerance {} exceeds the requested {}",
            plan.achieved_tolerance, inputs.eps
        );
    }
    let strategy = match plan.strategy {
        Strategy::TimeDominant => "time-dominant",
        Strategy::SpaceDominant => "space-dominant",
        Strategy::Explicit => "explicit",
    };
    println!("strategy:           {strategy}");
    println!("counters (k):       {}", plan.k);
    println!("rounds (R):         {}", plan.rounds);
    println!("achieved tolerance: {}", plan.achieved_tolerance);
    println!("requested eps:      {}", inputs.eps);
    println!("strategy,k,rounds,achieved_tolerance,requested_eps");
    println!(
        "{strategy},{},{},{},{}",
        plan.k, plan.rounds, plan.achieved_tolerance, inputs.eps
    );
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) => 1,
        Error::InfeasibleRounds { .. } | Error::InsufficientRounds { .. } => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are not errors; anything else is a config
            // problem and exits 1 per the documented exit codes.
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Plan(args) => cmd_plan(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
