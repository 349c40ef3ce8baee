//! Space-Saving stream summaries and their mergeable algebra.
//!
//! A [`StreamSummary`] keeps at most `capacity` counters over a stream of
//! `u32` items. Besides the classic streaming update it supports the two
//! operations the gossip protocol is built on: a capacity-bounded merge of
//! two summaries and scalar scaling of every frequency. Frequencies are
//! `f64` because repeated halving during gossip produces fractional values;
//! the local streaming phase only ever yields integers.

use std::collections::{BTreeSet, HashMap};

/// One monitored item together with its estimated frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Counter {
    pub item: u32,
    pub freq: f64,
}

/// A bounded set of `(item, estimated frequency)` counters.
///
/// Lookup by item is O(1); the minimum counter is maintained in a secondary
/// index so eviction is O(log k). Frequencies are always non-negative, which
/// makes the IEEE bit pattern of an `f64` order exactly like its numeric
/// value; the index exploits that to stay free of float-ordering wrappers.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSummary {
    capacity: usize,
    freqs: HashMap<u32, f64>,
    /// `(freq.to_bits(), item)`, ascending. Valid only because freq >= 0.
    order: BTreeSet<(u64, u32)>,
}

impl StreamSummary {
    /// Creates an empty summary with room for `capacity` counters.
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "summary capacity must be at least 1");
        StreamSummary {
            capacity,
            freqs: HashMap::with_capacity(capacity),
            order: BTreeSet::new(),
        }
    }

    /// Builds a summary over a whole stream.
    pub fn from_stream(stream: &[u32], capacity: usize) -> Self {
        let mut summary = StreamSummary::new(capacity);
        for &item in stream {
            summary.process(item);
        }
        summary
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Estimated frequency of `item`, if monitored.
    pub fn freq(&self, item: u32) -> Option<f64> {
        self.freqs.get(&item).copied()
    }

    /// The summary's minimum frequency: 0 while the summary holds fewer than
    /// `capacity` counters, otherwise the smallest stored frequency.
    pub fn min_freq(&self) -> f64 {
        if self.freqs.len() < self.capacity {
            0.0
        } else {
            self.order
                .first()
                .map(|&(bits, _)| f64::from_bits(bits))
                .unwrap_or(0.0)
        }
    }

    /// Sum of all stored frequencies, accumulated in deterministic order.
    pub fn total(&self) -> f64 {
        self.order
            .iter()
            .map(|&(bits, _)| f64::from_bits(bits))
            .sum()
    }

    /// Counters in ascending `(freq, item)` order.
    pub fn counters(&self) -> impl Iterator<Item = Counter> + '_ {
        self.order.iter().map(|&(bits, item)| Counter {
            item,
            freq: f64::from_bits(bits),
        })
    }

    /// Processes one stream item: increment if monitored, insert while below
    /// capacity, otherwise evict a minimum counter and inherit `min + 1`.
    /// Among equal-minimum counters the smallest item id is evicted.
    pub fn process(&mut self, item: u32) {
        if let Some(&f) = self.freqs.get(&item) {
            self.set(item, f, f + 1.0);
        } else if self.freqs.len() < self.capacity {
            self.insert(item, 1.0);
        } else {
            let &(min_bits, min_item) = self.order.first().expect("summary at capacity");
            let min = f64::from_bits(min_bits);
            self.order.remove(&(min_bits, min_item));
            self.freqs.remove(&min_item);
            self.insert(item, min + 1.0);
        }
    }

    /// Returns a copy with every frequency divided by `d`. The support set is
    /// unchanged, so dividing by `d` and then by `1/d` round-trips exactly
    /// whenever `d` is a power of two.
    pub fn scale(&self, d: f64) -> StreamSummary {
        assert!(d > 0.0, "scale divisor must be positive");
        let mut scaled = StreamSummary::new(self.capacity);
        for (&item, &f) in &self.freqs {
            scaled.insert(item, f / d);
        }
        scaled
    }

    fn insert(&mut self, item: u32, freq: f64) {
        debug_assert!(freq >= 0.0);
        self.freqs.insert(item, freq);
        self.order.insert((freq.to_bits(), item));
    }

    fn set(&mut self, item: u32, old: f64, new: f64) {
        self.order.remove(&(old.to_bits(), item));
        self.order.insert((new.to_bits(), item));
        self.freqs.insert(item, new);
    }
}

/// Keeps the `k` largest candidates by frequency; among equal frequencies the
/// smaller item id is retained. Candidates must have distinct items.
pub fn prune(mut candidates: Vec<Counter>, k: usize) -> StreamSummary {
    candidates.sort_unstable_by(|a, b| {
        b.freq.total_cmp(&a.freq).then_with(|| a.item.cmp(&b.item))
    });
    candidates.truncate(k);
    let mut summary = StreamSummary::new(k);
    for c in candidates {
        debug_assert!(summary.freq(c.item).is_none(), "duplicate candidate item");
        summary.insert(c.item, c.freq);
    }
    summary
}

/// Capacity-bounded merge of two summaries.
///
/// Items monitored by both sides get the sum of their frequencies; an item
/// monitored by only one side gets its frequency plus the other side's
/// minimum. The candidates are then pruned to the `k` largest. The result
/// summarizes the union of the two inputs' implicit streams with the usual
/// Space-Saving error bounds. No scaling happens here; the averaging step of
/// the gossip protocol applies its halving separately.
pub fn merge(s1: &StreamSummary, s2: &StreamSummary, k: usize) -> StreamSummary {
    let min1 = s1.min_freq();
    let min2 = s2.min_freq();
    let mut candidates: Vec<Counter> = Vec::with_capacity(s1.len() + s2.len());
    for (&item, &f) in &s1.freqs {
        let combined = match s2.freqs.get(&item) {
            Some(&g) => f + g,
            None => f + min2,
        };
        candidates.push(Counter {
            item,
            freq: combined,
        });
    }
    for (&item, &f) in &s2.freqs {
        if !s1.freqs.contains_key(&item) {
            candidates.push(Counter {
                item,
                freq: f + min1,
            });
        }
    }
    prune(candidates, k)
}
