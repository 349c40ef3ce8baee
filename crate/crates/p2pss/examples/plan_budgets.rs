//! Planning the counter/round budget for a target false-positive tolerance:
//! the two closed-form strategies plus a slice of the tradeoff curve.
//!
//! ```bash
//! cargo run --example plan_budgets
//! ```

use p2pss::planner::{self, PlanInputs};

fn main() {
    let inputs = PlanInputs::new(0.02, 0.01, 0.05, 10_000);
    inputs.validate().unwrap();
    println!(
        "target: phi {}, eps {}, delta {}, up to {} peers\n",
        inputs.phi, inputs.eps, inputs.delta, inputs.p_star
    );

    let time = planner::time_dominant_plan(&inputs).unwrap();
    println!(
        "time-dominant:  R = {:>3} rounds, k = {:>5} counters, achieved tolerance {:.5}",
        time.rounds, time.k, time.achieved_tolerance
    );
    let space = planner::space_dominant_plan(&inputs);
    println!(
        "space-dominant: R = {:>3} rounds, k = {:>5} counters, achieved tolerance {:.5}\n",
        space.rounds, space.k, space.achieved_tolerance
    );

    println!("the tradeoff in between (rounds -> required counters):");
    for rounds in time.rounds..=space.rounds {
        match planner::k_for_rounds(&inputs, rounds) {
            Ok(k) => println!("  R = {rounds:>3}  ->  k = {k}"),
            Err(err) => println!("  R = {rounds:>3}  ->  {err}"),
        }
    }

    println!("\nconfidence radius by round (drives every bound):");
    for rounds in [12, 16, 20, 24, 28, 32] {
        let es = planner::epsilon_star(
            inputs.p_star,
            inputs.delta,
            inputs.conv_factor,
            rounds,
        );
        println!("  after {rounds:>2} rounds: eps* = {es:.4e}");
    }
}
