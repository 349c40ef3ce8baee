//! Peer availability under the two churn models: permanent fail-stop decay
//! and the alternating heavy-tailed online/offline sessions.
//!
//! ```bash
//! cargo run --example churn_models
//! ```

use p2pss::churn::{ChurnModel, ChurnState, LifetimeKind, ShiftedPareto};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let peers = 1_000;

    // Session durations come from a Pareto Type II ("Shifted Pareto") law.
    let lifetime = ShiftedPareto::new(1.01, 1.0, 3.0);
    println!(
        "average-lifetime distribution: mean {:.2}, median {:.2}",
        lifetime.mean(),
        lifetime.quantile(0.5)
    );

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut fail_stop = ChurnState::init(&ChurnModel::FailStop { fail_prob: 0.05 }, peers, &mut rng);
    let mut alternating = ChurnState::init(
        &ChurnModel::Yao {
            lifetime: LifetimeKind::Pareto,
        },
        peers,
        &mut rng,
    );

    println!("\nround  online(fail-stop 0.05)  online(alternating)");
    for round in 0..=30 {
        if round > 0 {
            fail_stop.step(&mut rng);
            alternating.step(&mut rng);
        }
        if round % 3 == 0 {
            println!(
                "{:>5}  {:>21}  {:>19}",
                round,
                fail_stop.online_count(),
                alternating.online_count()
            );
        }
    }
    println!("\nfail-stop decays geometrically and never recovers;");
    println!("the alternating model settles into a steady online fraction.");
}
