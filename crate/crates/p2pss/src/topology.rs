//! Random P2P overlay graphs and fan-out sampling.

use std::collections::BTreeSet;
use std::io::{self, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seeds;

const ER_MAX_ATTEMPTS: u32 = 100;

/// Random graph family used for the overlay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphModel {
    /// Preferential attachment: each arriving node draws `attach` targets
    /// with probability proportional to degree (duplicates collapse, so a
    /// node contributes between 1 and `attach` edges).
    BarabasiAlbert { attach: usize },
    /// Every unordered pair becomes an edge independently with `edge_prob`.
    /// Disconnected draws are regenerated from a fresh derived seed.
    ErdosRenyi { edge_prob: f64 },
}

/// How many neighbors a peer contacts per round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fanout {
    Count(usize),
    All,
}

impl std::str::FromStr for Fanout {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(Fanout::All);
        }
        let n: usize = s
            .parse()
            .map_err(|_| format!("fan-out must be a positive integer or ALL, got {s:?}"))?;
        if n == 0 {
            return Err("fan-out must be at least 1".into());
        }
        Ok(Fanout::Count(n))
    }
}

impl std::fmt::Display for Fanout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fanout::Count(n) => write!(f, "{n}"),
            Fanout::All => write!(f, "ALL"),
        }
    }
}

/// Undirected connected graph over peer indices `0..peer_count`.
#[derive(Debug, Clone)]
pub struct Topology {
    adjacency: Vec<Vec<u32>>,
}

impl Topology {
    /// Generates a connected overlay, deterministically for a given seed.
    pub fn build(model: &GraphModel, peers: usize, seed: u64) -> Result<Topology> {
        if peers < 2 {
            return Err(Error::InvalidConfig(format!(
                "a topology needs at least 2 peers, got {peers}"
            )));
        }
        let topology = match *model {
            GraphModel::BarabasiAlbert { attach } => {
                if attach == 0 || attach >= peers {
                    return Err(Error::InvalidConfig(format!(
                        "attachment count must lie in [1, peers), got {attach}"
                    )));
                }
                Self::build_preferential(peers, attach, seed)
            }
            GraphModel::ErdosRenyi { edge_prob } => {
                if !(edge_prob > 0.0 && edge_prob <= 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "edge probability must lie in (0, 1], got {edge_prob}"
                    )));
                }
                Self::build_erdos_renyi(peers, edge_prob, seed)?
            }
        };
        debug_assert!(topology.is_symmetric());
        debug_assert!(topology.is_connected());
        Ok(topology)
    }

    fn build_preferential(peers: usize, attach: usize, seed: u64) -> Topology {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); peers];
        // One entry per edge endpoint; sampling from it is degree-weighted.
        let mut endpoints: Vec<u32> = Vec::with_capacity(2 * peers * attach);
        for node in 1..peers as u32 {
            let mut targets = BTreeSet::new();
            for _ in 0..attach {
                let target = if endpoints.is_empty() {
                    rng.random_range(0..node)
                } else {
                    endpoints[rng.random_range(0..endpoints.len())]
                };
                targets.insert(target);
            }
            for target in targets {
                adjacency[node as usize].push(target);
                adjacency[target as usize].push(node);
                endpoints.push(node);
                endpoints.push(target);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Topology { adjacency }
    }

    fn build_erdos_renyi(peers: usize, edge_prob: f64, seed: u64) -> Result<Topology> {
        for attempt in 0..ER_MAX_ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, attempt as u64));
            let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); peers];
            for u in 0..peers as u32 {
                for v in (u + 1)..peers as u32 {
                    if rng.random::<f64>() < edge_prob {
                        adjacency[u as usize].push(v);
                        adjacency[v as usize].push(u);
                    }
                }
            }
            let topology = Topology { adjacency };
            if topology.is_connected() {
                return Ok(topology);
            }
        }
        Err(Error::ConnectivityFailure {
            attempts: ER_MAX_ATTEMPTS,
        })
    }

    pub fn peer_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, peer: u32) -> &[u32] {
        &self.adjacency[peer as usize]
    }

    pub fn degree(&self, peer: u32) -> usize {
        self.adjacency[peer as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Uniform sample (without replacement) of `min(fanout, degree)`
    /// neighbors of `peer`; `Fanout::All` returns every neighbor.
    pub fn sample_fanout(
        &self,
        peer: u32,
        fanout: Fanout,
        rng: &mut impl Rng,
    ) -> Result<Vec<u32>> {
        let neighbors = self.neighbors(peer);
        if neighbors.is_empty() {
            return Err(Error::IsolatedPeer { peer });
        }
        match fanout {
            Fanout::All => Ok(neighbors.to_vec()),
            Fanout::Count(want) => {
                let take = want.min(neighbors.len());
                Ok(index::sample(rng, neighbors.len(), take)
                    .into_iter()
                    .map(|i| neighbors[i])
                    .collect())
            }
        }
    }

    pub fn is_connected(&self) -> bool {
        let p = self.adjacency.len();
        if p == 0 {
            return false;
        }
        let mut seen = vec![false; p];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut visited = 1;
        while let Some(node) = stack.pop() {
            for &next in &self.adjacency[node as usize] {
                if !seen[next as usize] {
                    seen[next as usize] = true;
                    visited += 1;
                    stack.push(next);
                }
            }
        }
        visited == p
    }

    fn is_symmetric(&self) -> bool {
        self.adjacency.iter().enumerate().all(|(u, list)| {
            list.iter()
                .all(|&v| self.adjacency[v as usize].contains(&(u as u32)))
        })
    }

    /// Writes one `u v` pair per line, each undirected edge once.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                if (u as u32) < v {
                    writeln!(w, "{u} {v}")?;
                }
            }
        }
        Ok(())
    }
}

/// Default edge probability for Erdos-Renyi overlays: `2 ln(p) / p`, sparse
/// but connected with high probability.
pub fn default_edge_prob(peers: usize) -> f64 {
    (2.0 * (peers as f64).ln() / peers as f64).min(1.0)
}
