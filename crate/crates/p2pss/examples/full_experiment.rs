//! End to end: generate a stream, split it over a network, gossip, query
//! every peer, and score the reports against exact ground truth.
//!
//! ```bash
//! cargo run --release --example full_experiment
//! ```

use p2pss::experiment::{self, ExperimentConfig};
use p2pss::topology::GraphModel;

fn main() {
    let config = ExperimentConfig {
        n: 500_000,
        universe: 200_000,
        peers: 64,
        k: 1_024,
        rounds: 24,
        repetitions: 3,
        seed: 42,
        topology: GraphModel::ErdosRenyi { edge_prob: 1.0 },
        ..ExperimentConfig::default()
    };
    println!(
        "running {} repetitions: {} items over {} peers, k = {}, {} rounds\n",
        config.repetitions, config.n, config.peers, config.k, config.rounds
    );

    let result = experiment::run_single(&config).unwrap();
    for rep in &result.repetitions {
        let queried = rep.outcomes.len();
        let perfect = rep
            .outcomes
            .iter()
            .filter(|o| o.metrics.recall == 1.0 && o.metrics.precision == 1.0)
            .count();
        let worst_are = rep
            .outcomes
            .iter()
            .map(|o| o.metrics.are)
            .fold(0.0, f64::max);
        println!(
            "repetition {} (seed {}): {} frequent items, {perfect}/{queried} peers exact, worst ARE {:.2e}",
            rep.repetition, rep.seed, rep.frequent_items, worst_are
        );
    }

    let agg = result.aggregate().unwrap();
    println!(
        "\naggregate over all queried peers: recall {}, precision {}, ARE {:.2e} (+/- {:.1e})",
        agg.recall.mean, agg.precision.mean, agg.are.mean, agg.are.ci_halfwidth
    );
    println!(
        "achieved false-positive tolerance of (k, rounds): {:.4e}",
        result.tolerance
    );
    println!("\nthe `p2pss` binary emits the same results as CSV:");
    println!("  p2pss run --peers 64 --n 500000 --k 1024 --topology er:1.0");
}
