//! The two verification oracles: a centralized replay that reproduces the
//! engine bit for bit, and the ghost tracker that sandwiches every sketch
//! estimate between exact bounds.
//!
//! ```bash
//! cargo run --example exact_oracles
//! ```

use p2pss::churn::{ChurnModel, ChurnState};
use p2pss::engine::{avg_merge_oracle, World};
use p2pss::sketch::StreamSummary;
use p2pss::topology::{Fanout, GraphModel, Topology};
use p2pss::workload::{gen_zipf, partition, PartitionScheme, StreamSpec};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let peers = 16;
    let k = 64;
    let stream = gen_zipf(&StreamSpec {
        n: 40_000,
        universe: 5_000,
        skew: 1.2,
        seed: 11,
    });
    let parts = partition(&stream, peers, &PartitionScheme::RoundRobin);
    let initial: Vec<StreamSummary> = parts
        .iter()
        .map(|p| StreamSummary::from_stream(p, k))
        .collect();

    let topology = Topology::build(&GraphModel::ErdosRenyi { edge_prob: 1.0 }, peers, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let churn = ChurnState::init(&ChurnModel::None, peers, &mut rng);
    let mut world = World::from_local_streams(&parts, topology, churn, k, Fanout::Count(1), 21);
    world.enable_ghost(&parts);
    world.run(20);

    // Replaying the exact pair sequence through the centralized oracle must
    // reproduce every summary bit for bit: both paths compose the same pure
    // exchange.
    let pairs = world.completed_pairs();
    let replayed = avg_merge_oracle(&initial, k, &pairs);
    let identical = world
        .states
        .iter()
        .zip(&replayed)
        .all(|(state, oracle)| state.summary == *oracle);
    println!(
        "centralized replay of {} exchanges: summaries identical = {identical}",
        pairs.len()
    );

    // The ghost tracker carried the exact frequency vectors through the
    // same averaging; every stored estimate lies within [exact, exact+n/k].
    println!(
        "ghost sandwich violations after 20 rounds: {}",
        world.sandwich_violations()
    );
    let ghost = world.ghost.as_ref().unwrap();
    let state = &world.states[3];
    println!("\npeer 3, top counters (estimate vs exact ghost value):");
    let mut top: Vec<_> = state.summary.counters().collect();
    top.sort_by(|a, b| b.freq.total_cmp(&a.freq));
    for c in top.iter().take(6) {
        println!(
            "  item {:>5}: estimate {:>9.3}, exact {:>9.3}, slack allowance {:.3}",
            c.item,
            c.freq,
            ghost.freq(3, c.item),
            state.n_avg_est / k as f64
        );
    }
}
