//! Zipfian stream generation, partitioning across peers, and the exact
//! frequency oracle the metrics are scored against.

use std::collections::{BTreeSet, HashMap};
use std::io::{self, Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parameters of a synthetic Zipfian stream.
#[derive(Debug, Clone, Copy)]
pub struct StreamSpec {
    /// Total number of items.
    pub n: u64,
    /// Universe size: items are drawn from `1..=universe`.
    pub universe: u32,
    /// Zipf exponent; rank `i` has probability proportional to `i^-skew`.
    pub skew: f64,
    pub seed: u64,
}

/// Generates the stream: ranks are sampled from the Zipf law and mapped to
/// item identifiers through a seeded permutation of the universe, so the
/// heavy items land on unpredictable ids.
pub fn gen_zipf(spec: &StreamSpec) -> Vec<u32> {
    assert!(spec.n >= 1 && spec.universe >= 1 && spec.skew > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rank_to_item: Vec<u32> = (1..=spec.universe).collect();
    rank_to_item.shuffle(&mut rng);
    let dist = rand_distr::Zipf::new(spec.universe as f64, spec.skew).expect("valid zipf");
    (0..spec.n)
        .map(|_| {
            let rank = rng.sample(dist) as usize;
            rank_to_item[rank - 1]
        })
        .collect()
}

/// How the global stream is split across peers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionScheme {
    /// Consecutive chunks, sizes differing by at most one.
    Contiguous,
    /// Item `i` goes to peer `i mod p`.
    RoundRobin,
    /// A seeded shuffle of the balanced peer assignment.
    Shuffled { seed: u64 },
    /// Every copy of `item` lands on peer 0, the rest is dealt round-robin.
    /// Reproduces the worst case for gossip variance, where a single peer
    /// holds an item's entire frequency mass; sizes are not balanced.
    Adversarial { item: u32 },
}

/// Splits `stream` into `peers` disjoint local streams that cover it.
pub fn partition(stream: &[u32], peers: usize, scheme: &PartitionScheme) -> Vec<Vec<u32>> {
    assert!(peers >= 1);
    let mut parts: Vec<Vec<u32>> = vec![Vec::new(); peers];
    match *scheme {
        PartitionScheme::Contiguous => {
            let base = stream.len() / peers;
            let extra = stream.len() % peers;
            let mut start = 0;
            for (peer, part) in parts.iter_mut().enumerate() {
                let size = base + usize::from(peer < extra);
                part.extend_from_slice(&stream[start..start + size]);
                start += size;
            }
        }
        PartitionScheme::RoundRobin => {
            for (i, &item) in stream.iter().enumerate() {
                parts[i % peers].push(item);
            }
        }
        PartitionScheme::Shuffled { seed } => {
            let mut owners: Vec<u32> = (0..stream.len())
                .map(|i| (i % peers) as u32)
                .collect();
            owners.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            for (&owner, &item) in owners.iter().zip(stream) {
                parts[owner as usize].push(item);
            }
        }
        PartitionScheme::Adversarial { item: hot } => {
            let mut next = 0usize;
            for &item in stream {
                if item == hot || peers == 1 {
                    parts[0].push(item);
                } else {
                    parts[1 + next].push(item);
                    next = (next + 1) % (peers - 1);
                }
            }
        }
    }
    parts
}

/// Exact per-item counts of a stream, plus the set of items whose frequency
/// strictly exceeds `phi * n`.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub counts: HashMap<u32, u64>,
    pub n: u64,
    pub phi: f64,
    pub frequent: BTreeSet<u32>,
}

impl GroundTruth {
    pub fn count(&self, item: u32) -> u64 {
        self.counts.get(&item).copied().unwrap_or(0)
    }
}

pub fn exact_frequencies(stream: &[u32], phi: f64) -> GroundTruth {
    let mut counts: HashMap<u32, u64> = HashMap::new();
    for &item in stream {
        *counts.entry(item).or_insert(0) += 1;
    }
    let n = stream.len() as u64;
    let threshold = phi * n as f64;
    let frequent = counts
        .iter()
        .filter(|&(_, &f)| f as f64 > threshold)
        .map(|(&item, _)| item)
        .collect();
    GroundTruth {
        counts,
        n,
        phi,
        frequent,
    }
}

/// Writes the stream as a flat sequence of little-endian `u32`s.
pub fn dump_stream<W: Write>(stream: &[u32], mut w: W) -> io::Result<()> {
    for &item in stream {
        w.write_all(&item.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a stream written by [`dump_stream`].
pub fn load_stream<R: Read>(mut r: R) -> io::Result<Vec<u32>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 4 != 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "stream file length is not a multiple of 4",
        ));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_item_universe() {
        let spec = StreamSpec {
            n: 5,
            universe: 1,
            skew: 1.2,
            seed: 0,
        };
        assert_eq!(gen_zipf(&spec), vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = StreamSpec {
            n: 10_000,
            universe: 1_000,
            skew: 1.1,
            seed: 77,
        };
        assert_eq!(gen_zipf(&spec), gen_zipf(&spec));
    }

    #[test]
    fn top_rank_frequency_matches_zipf_normalization() {
        let n = 1_000_000u64;
        let m = 100_000u32;
        let spec = StreamSpec {
            n,
            universe: m,
            skew: 1.2,
            seed: 5,
        };
        let stream = gen_zipf(&spec);
        let truth = exact_frequencies(&stream, 0.5);
        let top = truth.counts.values().max().copied().unwrap() as f64;
        let harmonic: f64 = (1..=m).map(|i| (i as f64).powf(-1.2)).sum();
        let expected = n as f64 / harmonic;
        assert!(
            (top - expected).abs() / expected <= 0.10,
            "top {top} vs expected {expected}"
        );
    }

    #[test]
    fn contiguous_splits_in_order() {
        let parts = partition(&[1, 2, 3, 4], 2, &PartitionScheme::Contiguous);
        assert_eq!(parts, vec![vec![1, 2], vec![3, 4]]);
    }

    #[test]
    fn partitions_cover_and_balance() {
        let spec = StreamSpec {
            n: 1_003,
            universe: 100,
            skew: 1.0,
            seed: 3,
        };
        let stream = gen_zipf(&spec);
        for scheme in [
            PartitionScheme::Contiguous,
            PartitionScheme::RoundRobin,
            PartitionScheme::Shuffled { seed: 9 },
        ] {
            let parts = partition(&stream, 7, &scheme);
            let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
            assert_eq!(sizes.iter().sum::<usize>(), stream.len());
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut merged: Vec<u32> = parts.concat();
            merged.sort_unstable();
            let mut expected = stream.clone();
            expected.sort_unstable();
            assert_eq!(merged, expected, "scheme {scheme:?}");
        }
    }

    #[test]
    fn per_peer_counts_sum_to_global() {
        let spec = StreamSpec {
            n: 20_000,
            universe: 500,
            skew: 1.2,
            seed: 13,
        };
        let stream = gen_zipf(&spec);
        let global = exact_frequencies(&stream, 0.01);
        let parts = partition(&stream, 10, &PartitionScheme::Shuffled { seed: 4 });
        let mut rebuilt: HashMap<u32, u64> = HashMap::new();
        for part in &parts {
            for (item, count) in exact_frequencies(part, 0.01).counts {
                *rebuilt.entry(item).or_insert(0) += count;
            }
        }
        assert_eq!(rebuilt, global.counts);
    }

    #[test]
    fn adversarial_concentrates_the_chosen_item() {
        let stream = vec![9, 1, 9, 2, 9, 3, 9, 4];
        let parts = partition(&stream, 3, &PartitionScheme::Adversarial { item: 9 });
        assert_eq!(parts[0], vec![9, 9, 9, 9]);
        assert!(parts[1..].iter().all(|p| !p.contains(&9)));
        assert_eq!(parts.iter().map(Vec::len).sum::<usize>(), stream.len());
    }

    #[test]
    fn frequent_set_uses_strict_threshold() {
        let truth = exact_frequencies(&[1, 1, 2], 0.5);
        assert_eq!(truth.frequent, BTreeSet::from([1]));
        let boundary = exact_frequencies(&[1, 2], 0.5);
        assert!(boundary.frequent.is_empty());
    }

    #[test]
    fn frequent_set_shrinks_as_phi_grows() {
        let spec = StreamSpec {
            n: 100_000,
            universe: 10_000,
            skew: 1.2,
            seed: 8,
        };
        let stream = gen_zipf(&spec);
        let loose = exact_frequencies(&stream, 0.01);
        let tight = exact_frequencies(&stream, 0.03);
        assert!(tight.frequent.is_subset(&loose.frequent));
        assert!(!loose.frequent.is_empty());
    }

    #[test]
    fn frequent_set_matches_second_pass() {
        let spec = StreamSpec {
            n: 1_000_000,
            universe: 100_000,
            skew: 1.2,
            seed: 2,
        };
        let stream = gen_zipf(&spec);
        let truth = exact_frequencies(&stream, 0.02);
        // Independent second pass: sort a copy and count runs.
        let mut sorted = stream.clone();
        sorted.sort_unstable();
        let mut second = BTreeSet::new();
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            if (j - i) as f64 > 0.02 * sorted.len() as f64 {
                second.insert(sorted[i]);
            }
            i = j;
        }
        assert_eq!(truth.frequent, second);
    }

    #[test]
    fn stream_file_round_trip() {
        let stream = vec![0u32, 1, 0xFFFF_FFFF, 42];
        let mut buf = Vec::new();
        dump_stream(&stream, &mut buf).unwrap();
        assert_eq!(buf.len(), 16);
        assert_eq!(load_stream(buf.as_slice()).unwrap(), stream);
        assert!(load_stream(&buf[..3]).is_err());
    }
}
