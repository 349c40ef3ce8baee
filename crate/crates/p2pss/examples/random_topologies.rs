//! The two overlay families: degree profiles, connectivity, and edge-list
//! export for external plotting.
//!
//! ```bash
//! cargo run --example random_topologies
//! ```

use p2pss::topology::{default_edge_prob, GraphModel, Topology};

fn degree_summary(t: &Topology) -> (usize, usize, f64) {
    let degrees: Vec<usize> = (0..t.peer_count() as u32).map(|p| t.degree(p)).collect();
    let min = *degrees.iter().min().unwrap();
    let max = *degrees.iter().max().unwrap();
    let mean = degrees.iter().sum::<usize>() as f64 / degrees.len() as f64;
    (min, max, mean)
}

fn main() {
    let peers = 1_000;

    let ba = Topology::build(&GraphModel::BarabasiAlbert { attach: 2 }, peers, 7).unwrap();
    let (min, max, mean) = degree_summary(&ba);
    println!("preferential attachment (attach 2), {peers} peers:");
    println!("  degrees: min {min}, mean {mean:.1}, max {max} (heavy tail)");
    println!("  connected: {}", ba.is_connected());

    let prob = default_edge_prob(peers);
    let er = Topology::build(&GraphModel::ErdosRenyi { edge_prob: prob }, peers, 7).unwrap();
    let (min, max, mean) = degree_summary(&er);
    println!("\nErdos-Renyi (edge probability {prob:.4}), {peers} peers:");
    println!("  degrees: min {min}, mean {mean:.1}, max {max} (concentrated)");
    println!("  connected: {}", er.is_connected());

    // Edge-list export, one "u v" line per edge; pipe into any graph tool.
    let mut buf = Vec::new();
    ba.write_edge_list(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    println!(
        "\nedge-list export of the first graph: {} edges, first lines:",
        text.lines().count()
    );
    for line in text.lines().take(5) {
        println!("  {line}");
    }
}
