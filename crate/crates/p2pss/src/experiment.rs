//! Experiment orchestration: full-run configuration, repetition loops,
//! parameter sweeps, and CSV emission.
//!
//! Everything is deterministic: repetition `i` runs with seed `base + i`,
//! and each repetition derives independent sub-seeds for stream generation,
//! topology, churn and scheduling. The same `(config, seed)` pair always
//! produces byte-identical CSV.

use std::io::{self, Write};

use crate::churn::{ChurnModel, ChurnState, LifetimeKind};
use crate::engine::{RunTrace, World};
use crate::error::{Error, Result};
use crate::metrics::{self, BoundCheck, MetricsAggregate, RunMetrics};
use crate::planner;
use crate::protocol::{self, QueryParams};
use crate::seeds;
use crate::sketch::StreamSummary;
use crate::topology::{Fanout, GraphModel, Topology};
use crate::workload::{self, PartitionScheme, StreamSpec};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CSV_HEADER: &str =
    "run_id,seed,peer_id,param_name,param_value,recall,precision,are,eps_star,p_est,rounds,k,online_peers";

pub const TRACE_CSV_HEADER: &str = "run_id,round,sum_n_est,sum_q_est,var_n_est,online";

/// Environment variable that overrides the built-in default seed. Explicit
/// configuration (file or flag) still wins.
pub const SEED_ENV_VAR: &str = "P2PSS_SEED";

const DEFAULT_SEED: u64 = 42;

/// Full parameterization of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Global stream length.
    pub n: u64,
    /// Universe size; items are drawn from `1..=universe`.
    pub universe: u32,
    /// Zipf exponent.
    pub skew: f64,
    pub peers: usize,
    /// Counters per peer summary.
    pub k: usize,
    pub rounds: u32,
    pub fanout: Fanout,
    pub phi: f64,
    pub delta: f64,
    /// Upper bound on the peer count used by queries; defaults to `peers`.
    pub p_star: Option<u64>,
    pub topology: GraphModel,
    pub churn: ChurnModel,
    pub partition: PartitionScheme,
    pub repetitions: usize,
    pub seed: u64,
    /// Track exact per-peer frequency vectors (memory heavy; small runs only).
    pub ghost: bool,
    /// Query a single peer instead of every online peer.
    pub query_peer: Option<u32>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 2_000_000,
            universe: 1_000_000,
            skew: 1.2,
            peers: 10_000,
            k: 2_200,
            rounds: 24,
            fanout: Fanout::Count(1),
            phi: 0.02,
            delta: 0.05,
            p_star: None,
            topology: GraphModel::BarabasiAlbert { attach: 2 },
            churn: ChurnModel::None,
            partition: PartitionScheme::Contiguous,
            repetitions: 10,
            seed: default_seed(),
            ghost: false,
            query_peer: None,
        }
    }
}

fn default_seed() -> u64 {
    std::env::var(SEED_ENV_VAR)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

impl ExperimentConfig {
    pub fn effective_p_star(&self) -> u64 {
        self.p_star.unwrap_or(self.peers as u64)
    }

    pub fn query_params(&self) -> QueryParams {
        QueryParams {
            phi: self.phi,
            delta: self.delta,
            p_star: self.effective_p_star(),
            conv_factor: planner::default_convergence_factor(),
        }
    }

    /// Tolerance achieved by this configuration's `(k, rounds)` pair.
    pub fn achieved_tolerance(&self) -> f64 {
        planner::achieved_tolerance(
            self.k,
            self.rounds,
            self.phi,
            self.delta,
            self.effective_p_star(),
            planner::default_convergence_factor(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.universe < 1 {
            return Err(Error::InvalidConfig("universe must be at least 1".into()));
        }
        if self.skew <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "skew must be positive, got {}",
                self.skew
            )));
        }
        if self.peers < 2 {
            return Err(Error::InvalidConfig(format!(
                "at least 2 peers required, got {}",
                self.peers
            )));
        }
        if self.k < 1 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if !(self.phi > 0.0 && self.phi < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "phi must lie in (0, 1), got {}",
                self.phi
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.effective_p_star() < self.peers as u64 {
            return Err(Error::InvalidConfig(format!(
                "p_star {} is below the actual peer count {}",
                self.effective_p_star(),
                self.peers
            )));
        }
        if let ChurnModel::FailStop { fail_prob } = self.churn {
            if !(0.0..=1.0).contains(&fail_prob) {
                return Err(Error::InvalidConfig(format!(
                    "failure probability must lie in [0, 1], got {fail_prob}"
                )));
            }
        }
        if self.repetitions < 1 {
            return Err(Error::InvalidConfig(
                "at least 1 repetition required".into(),
            ));
        }
        if let Some(peer) = self.query_peer {
            if peer as usize >= self.peers {
                return Err(Error::InvalidConfig(format!(
                    "query peer {peer} out of range (peers = {})",
                    self.peers
                )));
            }
        }
        Ok(())
    }

    /// Rejects configurations whose queries are guaranteed to fail because
    /// the confidence radius never drops below 1 within the round budget.
    pub fn validate_feasible(&self) -> Result<()> {
        self.validate()?;
        let es = planner::epsilon_star(
            self.effective_p_star(),
            self.delta,
            planner::default_convergence_factor(),
            self.rounds,
        );
        if es >= 1.0 {
            return Err(Error::InsufficientRounds { eps_star: es });
        }
        Ok(())
    }

    /// Applies one `key = value` assignment in the flat config-file syntax.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::InvalidConfig(format!("bad value for {what}: {value:?}"));
        match key {
            "n" => self.n = value.parse().map_err(|_| bad("n"))?,
            "universe" => self.universe = value.parse().map_err(|_| bad("universe"))?,
            "skew" | "rho" => self.skew = value.parse().map_err(|_| bad("skew"))?,
            "peers" => self.peers = value.parse().map_err(|_| bad("peers"))?,
            "k" => self.k = value.parse().map_err(|_| bad("k"))?,
            "rounds" => self.rounds = value.parse().map_err(|_| bad("rounds"))?,
            "fanout" => self.fanout = value.parse().map_err(Error::InvalidConfig)?,
            "phi" => self.phi = value.parse().map_err(|_| bad("phi"))?,
            "delta" => self.delta = value.parse().map_err(|_| bad("delta"))?,
            "p_star" => self.p_star = Some(value.parse().map_err(|_| bad("p_star"))?),
            "topology" => self.topology = parse_topology(value)?,
            "churn" => self.churn = parse_churn(value)?,
            "partition" => self.partition = parse_partition(value)?,
            "repetitions" => self.repetitions = value.parse().map_err(|_| bad("repetitions"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "ghost" => self.ghost = value.parse().map_err(|_| bad("ghost"))?,
            "query_peer" => self.query_peer = Some(value.parse().map_err(|_| bad("query_peer"))?),
            _ => {
                return Err(Error::InvalidConfig(format!("unknown config key {key:?}")));
            }
        }
        Ok(())
    }

    /// Parses a flat `key = value` config file; `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

/// `ba:<attach>`, `er:<edge_prob>`, or `complete`.
pub fn parse_topology(value: &str) -> Result<GraphModel> {
    let lower = value.to_ascii_lowercase();
    if lower == "complete" {
        return Ok(GraphModel::ErdosRenyi { edge_prob: 1.0 });
    }
    if let Some(attach) = lower.strip_prefix("ba:") {
        let attach = attach
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad attachment count in {value:?}")))?;
        return Ok(GraphModel::BarabasiAlbert { attach });
    }
    if let Some(prob) = lower.strip_prefix("er:") {
        let edge_prob = prob
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad edge probability in {value:?}")))?;
        return Ok(GraphModel::ErdosRenyi { edge_prob });
    }
    Err(Error::InvalidConfig(format!(
        "unknown topology {value:?} (expected ba:<attach>, er:<prob> or complete)"
    )))
}

/// `none`, `failstop:<prob>`, `yao:pareto`, or `yao:exp`.
pub fn parse_churn(value: &str) -> Result<ChurnModel> {
    let lower = value.to_ascii_lowercase();
    if lower == "none" {
        return Ok(ChurnModel::None);
    }
    if let Some(prob) = lower.strip_prefix("failstop:") {
        let fail_prob = prob
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad failure probability in {value:?}")))?;
        return Ok(ChurnModel::FailStop { fail_prob });
    }
    match lower.as_str() {
        "yao:pareto" => Ok(ChurnModel::Yao {
            lifetime: LifetimeKind::Pareto,
        }),
        "yao:exp" | "yao:exponential" => Ok(ChurnModel::Yao {
            lifetime: LifetimeKind::Exponential,
        }),
        _ => Err(Error::InvalidConfig(format!(
            "unknown churn model {value:?} (expected none, failstop:<prob>, yao:pareto or yao:exp)"
        ))),
    }
}

/// `contiguous`, `roundrobin`, `shuffled:<seed>`, or `adversarial:<item>`.
pub fn parse_partition(value: &str) -> Result<PartitionScheme> {
    let lower = value.to_ascii_lowercase();
    match lower.as_str() {
        "contiguous" => return Ok(PartitionScheme::Contiguous),
        "roundrobin" => return Ok(PartitionScheme::RoundRobin),
        _ => {}
    }
    if let Some(seed) = lower.strip_prefix("shuffled:") {
        let seed = seed
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad shuffle seed in {value:?}")))?;
        return Ok(PartitionScheme::Shuffled { seed });
    }
    if let Some(item) = lower.strip_prefix("adversarial:") {
        let item = item
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad item id in {value:?}")))?;
        return Ok(PartitionScheme::Adversarial { item });
    }
    Err(Error::InvalidConfig(format!(
        "unknown partition scheme {value:?}"
    )))
}

/// Sub-seeds of one repetition, derived from `base_seed + repetition`.
#[derive(Debug, Clone, Copy)]
pub struct RepetitionSeeds {
    pub stream: u64,
    pub topology: u64,
    pub churn: u64,
    pub world: u64,
}

impl RepetitionSeeds {
    pub fn from_base(rep_seed: u64) -> Self {
        RepetitionSeeds {
            stream: seeds::derive(rep_seed, 1),
            topology: seeds::derive(rep_seed, 2),
            churn: seeds::derive(rep_seed, 3),
            world: seeds::derive(rep_seed, 4),
        }
    }
}

/// One queried peer's results.
#[derive(Debug, Clone)]
pub struct PeerOutcome {
    pub peer: u32,
    pub metrics: RunMetrics,
    pub eps_star: f64,
    pub p_est: f64,
    pub bounds: BoundCheck,
}

/// Everything recorded about one repetition.
#[derive(Debug, Clone)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub seed: u64,
    pub outcomes: Vec<PeerOutcome>,
    /// Queries that failed (unreached or stale peers) and were skipped.
    pub skipped_queries: usize,
    pub online_at_end: usize,
    pub frequent_items: usize,
    pub trace: RunTrace,
    pub sandwich_violations: u64,
}

/// Results of all repetitions of one configuration.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub repetitions: Vec<RepetitionResult>,
    /// Tolerance achieved by the configured `(k, rounds)`.
    pub tolerance: f64,
}

impl ExperimentResult {
    pub fn all_metrics(&self) -> Vec<RunMetrics> {
        self.repetitions
            .iter()
            .flat_map(|rep| rep.outcomes.iter().map(|o| o.metrics))
            .collect()
    }

    /// Aggregates over every `(repetition, peer)` outcome; `None` when no
    /// query succeeded anywhere.
    pub fn aggregate(&self) -> Option<MetricsAggregate> {
        let all = self.all_metrics();
        if all.is_empty() {
            None
        } else {
            Some(metrics::aggregate(&all))
        }
    }

    pub fn total_skipped(&self) -> usize {
        self.repetitions.iter().map(|r| r.skipped_queries).sum()
    }
}

/// Runs every repetition of `config` sequentially.
pub fn run_single(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate_feasible()?;
    let mut repetitions = Vec::with_capacity(config.repetitions);
    for rep in 0..config.repetitions {
        let rep_seed = config.seed.wrapping_add(rep as u64);
        repetitions.push(run_repetition(config, rep, rep_seed)?);
    }
    Ok(ExperimentResult {
        config: config.clone(),
        repetitions,
        tolerance: config.achieved_tolerance(),
    })
}

/// Runs one repetition: generate, partition, gossip, query, score.
pub fn run_repetition(
    config: &ExperimentConfig,
    repetition: usize,
    rep_seed: u64,
) -> Result<RepetitionResult> {
    let sub = RepetitionSeeds::from_base(rep_seed);
    let stream = workload::gen_zipf(&StreamSpec {
        n: config.n,
        universe: config.universe,
        skew: config.skew,
        seed: sub.stream,
    });
    let truth = workload::exact_frequencies(&stream, config.phi);
    let parts = workload::partition(&stream, config.peers, &config.partition);
    drop(stream);
    let topology = Topology::build(&config.topology, config.peers, sub.topology)?;
    let mut churn_rng = ChaCha8Rng::seed_from_u64(sub.churn);
    let churn = ChurnState::init(&config.churn, config.peers, &mut churn_rng);

    let mut world = World::from_local_streams(
        &parts,
        topology,
        churn,
        config.k,
        config.fanout,
        sub.world,
    );
    if config.ghost {
        world.enable_ghost(&parts);
    }
    drop(parts);
    let trace = world.run(config.rounds);

    let params = config.query_params();
    let eps = config.achieved_tolerance();
    let queried: Vec<u32> = match config.query_peer {
        Some(peer) => vec![peer],
        None => world.churn.online_peers(),
    };
    let mut outcomes = Vec::with_capacity(queried.len());
    let mut skipped = 0usize;
    for peer in queried {
        match protocol::query(&world.states[peer as usize], &params) {
            Ok(report) => {
                let metrics = metrics::score(&report, &truth);
                let bounds = metrics::bound_check(&report, &truth, config.k, eps);
                outcomes.push(PeerOutcome {
                    peer,
                    metrics,
                    eps_star: report.eps_star,
                    p_est: report.p_est,
                    bounds,
                });
            }
            Err(_) => skipped += 1,
        }
    }
    Ok(RepetitionResult {
        repetition,
        seed: rep_seed,
        outcomes,
        skipped_queries: skipped,
        online_at_end: world.churn.online_count(),
        frequent_items: truth.frequent.len(),
        trace,
        sandwich_violations: world.sandwich_violations(),
    })
}

/// The engine-facing view of one configured run: final per-peer states plus
/// the per-round trace, without the query/score stage.
pub fn run_world(config: &ExperimentConfig, rep_seed: u64) -> Result<(World, RunTrace)> {
    config.validate()?;
    let sub = RepetitionSeeds::from_base(rep_seed);
    let stream = workload::gen_zipf(&StreamSpec {
        n: config.n,
        universe: config.universe,
        skew: config.skew,
        seed: sub.stream,
    });
    let parts = workload::partition(&stream, config.peers, &config.partition);
    drop(stream);
    let topology = Topology::build(&config.topology, config.peers, sub.topology)?;
    let mut churn_rng = ChaCha8Rng::seed_from_u64(sub.churn);
    let churn = ChurnState::init(&config.churn, config.peers, &mut churn_rng);
    let mut world = World::from_local_streams(
        &parts,
        topology,
        churn,
        config.k,
        config.fanout,
        sub.world,
    );
    if config.ghost {
        world.enable_ghost(&parts);
    }
    let trace = world.run(config.rounds);
    Ok((world, trace))
}

/// Initial summaries of a configured repetition, for oracle replays.
pub fn initial_summaries(config: &ExperimentConfig, rep_seed: u64) -> Vec<StreamSummary> {
    let sub = RepetitionSeeds::from_base(rep_seed);
    let stream = workload::gen_zipf(&StreamSpec {
        n: config.n,
        universe: config.universe,
        skew: config.skew,
        seed: sub.stream,
    });
    workload::partition(&stream, config.peers, &config.partition)
        .iter()
        .map(|part| StreamSummary::from_stream(part, config.k))
        .collect()
}

/// Parameter axes a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Rho,
    Phi,
    Peers,
    K,
    Rounds,
    Fanout,
    FailProb,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Rho => "rho",
            SweepParam::Phi => "phi",
            SweepParam::Peers => "peers",
            SweepParam::K => "k",
            SweepParam::Rounds => "rounds",
            SweepParam::Fanout => "fanout",
            SweepParam::FailProb => "fail_prob",
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rho" | "skew" => Ok(SweepParam::Rho),
            "phi" => Ok(SweepParam::Phi),
            "peers" => Ok(SweepParam::Peers),
            "k" => Ok(SweepParam::K),
            "rounds" => Ok(SweepParam::Rounds),
            "fanout" => Ok(SweepParam::Fanout),
            "fail_prob" => Ok(SweepParam::FailProb),
            _ => Err(Error::InvalidConfig(format!("unknown sweep parameter {s:?}"))),
        }
    }
}

/// Applies one sweep value to a copy of the base configuration.
pub fn apply_sweep_value(
    base: &ExperimentConfig,
    param: SweepParam,
    value: &str,
) -> Result<ExperimentConfig> {
    let mut config = base.clone();
    let bad = |what: &str| Error::InvalidConfig(format!("bad {what} value {value:?}"));
    match param {
        SweepParam::Rho => config.skew = value.parse().map_err(|_| bad("rho"))?,
        SweepParam::Phi => config.phi = value.parse().map_err(|_| bad("phi"))?,
        SweepParam::Peers => config.peers = value.parse().map_err(|_| bad("peers"))?,
        SweepParam::K => config.k = value.parse().map_err(|_| bad("k"))?,
        SweepParam::Rounds => config.rounds = value.parse().map_err(|_| bad("rounds"))?,
        SweepParam::Fanout => config.fanout = value.parse().map_err(Error::InvalidConfig)?,
        SweepParam::FailProb => {
            let fail_prob: f64 = value.parse().map_err(|_| bad("fail_prob"))?;
            config.churn = ChurnModel::FailStop { fail_prob };
        }
    }
    Ok(config)
}

/// One sweep point and its results.
#[derive(Debug, Clone)]
pub struct SweepBlock {
    pub value: String,
    pub result: ExperimentResult,
}

/// Runs the base configuration once per value. Every point reuses the same
/// base seed, so points are paired comparisons over identical streams.
pub fn run_sweep(
    base: &ExperimentConfig,
    param: SweepParam,
    values: &[String],
) -> Result<Vec<SweepBlock>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    let mut blocks = Vec::with_capacity(values.len());
    for value in values {
        let config = apply_sweep_value(base, param, value)?;
        blocks.push(SweepBlock {
            value: value.clone(),
            result: run_single(&config)?,
        });
    }
    Ok(blocks)
}

fn write_rows<W: Write>(
    w: &mut W,
    result: &ExperimentResult,
    param_name: &str,
    param_value: &str,
) -> io::Result<()> {
    for rep in &result.repetitions {
        for outcome in &rep.outcomes {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                rep.repetition,
                rep.seed,
                outcome.peer,
                param_name,
                param_value,
                outcome.metrics.recall,
                outcome.metrics.precision,
                outcome.metrics.are,
                outcome.eps_star,
                outcome.p_est,
                result.config.rounds,
                result.config.k,
                rep.online_at_end,
            )?;
        }
    }
    if let Some(agg) = result.aggregate() {
        let count: usize = result.repetitions.iter().map(|r| r.outcomes.len()).sum();
        let mean = |f: fn(&PeerOutcome) -> f64| -> f64 {
            result
                .repetitions
                .iter()
                .flat_map(|r| r.outcomes.iter().map(f))
                .sum::<f64>()
                / count as f64
        };
        let online_mean = result
            .repetitions
            .iter()
            .map(|r| r.online_at_end as f64)
            .sum::<f64>()
            / result.repetitions.len() as f64;
        writeln!(
            w,
            "aggregate,{},,{},{},{},{},{},{},{},{},{},{}",
            result.config.seed,
            param_name,
            param_value,
            agg.recall.mean,
            agg.precision.mean,
            agg.are.mean,
            mean(|o| o.eps_star),
            mean(|o| o.p_est),
            result.config.rounds,
            result.config.k,
            online_mean,
        )?;
    }
    Ok(())
}

/// Emits the header plus one row per `(repetition, peer)` and a closing
/// aggregate row.
pub fn write_csv<W: Write>(w: &mut W, result: &ExperimentResult) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    write_rows(w, result, "", "")
}

/// Emits the header plus one block of rows per sweep value.
pub fn write_sweep_csv<W: Write>(
    w: &mut W,
    param: SweepParam,
    blocks: &[SweepBlock],
) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for block in blocks {
        write_rows(w, &block.result, param.name(), &block.value)?;
    }
    Ok(())
}

/// Emits per-round traces of every repetition.
pub fn write_trace_csv<W: Write>(w: &mut W, result: &ExperimentResult) -> io::Result<()> {
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for rep in &result.repetitions {
        for stats in &rep.trace.per_round {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                rep.repetition,
                stats.round,
                stats.sum_n_est,
                stats.sum_q_est,
                stats.var_n_est,
                stats.online,
            )?;
        }
    }
    Ok(())
}
