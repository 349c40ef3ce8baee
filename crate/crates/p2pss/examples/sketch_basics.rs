//! The bounded summary on its own: stream updates, error bounds against
//! exact counts, and the merge/scale algebra.
//!
//! ```bash
//! cargo run --example sketch_basics
//! ```

use std::collections::HashMap;

use p2pss::sketch::{self, StreamSummary};
use p2pss::workload::{gen_zipf, StreamSpec};

fn main() {
    // Summarize a skewed stream with far fewer counters than distinct items.
    let spec = StreamSpec {
        n: 100_000,
        universe: 50_000,
        skew: 1.2,
        seed: 7,
    };
    let stream = gen_zipf(&spec);
    let k = 64;
    let summary = StreamSummary::from_stream(&stream, k);

    let mut exact: HashMap<u32, u64> = HashMap::new();
    for &item in &stream {
        *exact.entry(item).or_insert(0) += 1;
    }

    println!(
        "{} items summarized into {} counters (min frequency {:.1})",
        stream.len(),
        summary.len(),
        summary.min_freq()
    );
    println!("top counters, estimate vs exact:");
    let mut top: Vec<_> = summary.counters().collect();
    top.sort_by(|a, b| b.freq.total_cmp(&a.freq));
    for c in top.iter().take(8) {
        println!(
            "  item {:>6}: estimate {:>8.1}, exact {:>7}",
            c.item, c.freq, exact[&c.item]
        );
    }

    // Every stored estimate over-counts by at most the summary minimum.
    let min = summary.min_freq();
    let worst_overcount = summary
        .counters()
        .map(|c| c.freq - exact[&c.item] as f64)
        .fold(0.0, f64::max);
    println!(
        "worst over-count {:.1}, guaranteed at most {:.1} (= min frequency)",
        worst_overcount, min
    );

    // Merging two halves of the stream reproduces a summary of the whole,
    // within the same bounds; scaling by 2 then 1/2 round-trips exactly.
    let (a, b) = stream.split_at(stream.len() / 2);
    let merged = sketch::merge(
        &StreamSummary::from_stream(a, k),
        &StreamSummary::from_stream(b, k),
        k,
    );
    println!(
        "merged half-stream summaries: {} counters, min frequency {:.1}",
        merged.len(),
        merged.min_freq()
    );
    assert_eq!(merged.scale(2.0).scale(0.5), merged);
    println!("scale(2) then scale(1/2) is exact");
}
