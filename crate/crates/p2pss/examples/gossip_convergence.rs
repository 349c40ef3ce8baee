//! Watch the averaging protocol converge: per-round variance of the length
//! estimates, and the peer-count estimate sharpening toward the true count.
//!
//! ```bash
//! cargo run --example gossip_convergence
//! ```

use p2pss::churn::{ChurnModel, ChurnState};
use p2pss::engine::World;
use p2pss::planner;
use p2pss::protocol;
use p2pss::topology::{Fanout, GraphModel, Topology};
use p2pss::workload::{gen_zipf, StreamSpec};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let peers = 64usize;
    let stream = gen_zipf(&StreamSpec {
        n: 200_000,
        universe: 100_000,
        skew: 1.2,
        seed: 3,
    });
    // Deliberately uneven loads: peer l gets a slice proportional to l + 1,
    // so the initial length estimates have plenty of variance to average
    // away.
    let unit = stream.len() / (peers * (peers + 1) / 2);
    let mut parts: Vec<Vec<u32>> = Vec::with_capacity(peers);
    let mut start = 0;
    for l in 0..peers {
        let size = if l == peers - 1 {
            stream.len() - start
        } else {
            unit * (l + 1)
        };
        parts.push(stream[start..start + size].to_vec());
        start += size;
    }

    let topology = Topology::build(&GraphModel::ErdosRenyi { edge_prob: 1.0 }, peers, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let churn = ChurnState::init(&ChurnModel::None, peers, &mut rng);
    let mut world = World::from_local_streams(&parts, topology, churn, 256, Fanout::Count(1), 4);

    println!("round  variance(n_est)  ratio   peer-count estimate at peer 0");
    let mut prev_var = world.stats().var_n_est;
    println!("{:>5}  {:>15.3e}      -   (no mass yet)", 0, prev_var);
    for round in 1..=20 {
        world.run_round();
        let stats = world.stats();
        let p_est = protocol::estimate_peers(&world.states[0])
            .map(|p| format!("{p:.4}"))
            .unwrap_or_else(|_| "unreached".into());
        println!(
            "{:>5}  {:>15.3e}  {:>5.2}   {}",
            round,
            stats.var_n_est,
            stats.var_n_est / prev_var,
            p_est
        );
        prev_var = stats.var_n_est;
    }
    println!(
        "\nexpected per-round variance reduction on this schedule: {:.4}",
        planner::default_convergence_factor()
    );
    println!("true peer count: {peers}");
}
