//! Round-based synchronous scheduler.
//!
//! Each round steps churn first, then visits the online peers in a random
//! permutation. Every visited peer initiates its fan-out worth of exchanges
//! sequentially and atomically, always from its freshest state; an exchange
//! whose partner turns out offline or dead is cancelled and leaves the
//! initiator untouched. Pairs are drawn from the full neighbor list (a peer
//! does not know who is alive until it tries), which is what makes the
//! cancellation rule observable at all.
//!
//! Two oracles live here as well: a centralized replay of the pairwise
//! merge-and-halve schedule, and a ghost tracker that carries the exact
//! per-peer frequency vectors through the same averaging so sketch estimates
//! can be sandwiched against them.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::churn::ChurnState;
use crate::protocol::{self, PeerState};
use crate::sketch::{self, StreamSummary};
use crate::topology::{Fanout, Topology};

/// One attempted exchange, as recorded in the event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExchangeEvent {
    pub round: u32,
    pub initiator: u32,
    pub partner: u32,
    pub completed: bool,
}

/// Exact per-peer frequency vectors, evolved by the same pairwise averaging
/// as the summaries. Purely a test-and-verification device; memory grows
/// with `peers x distinct items`.
#[derive(Debug, Clone)]
pub struct GhostTracker {
    pub freqs: Vec<HashMap<u32, f64>>,
    pub lengths: Vec<f64>,
}

impl GhostTracker {
    pub fn from_local_streams(streams: &[Vec<u32>]) -> GhostTracker {
        let freqs = streams
            .iter()
            .map(|stream| {
                let mut counts: HashMap<u32, f64> = HashMap::new();
                for &item in stream {
                    *counts.entry(item).or_insert(0.0) += 1.0;
                }
                counts
            })
            .collect();
        let lengths = streams.iter().map(|s| s.len() as f64).collect();
        GhostTracker { freqs, lengths }
    }

    /// Exact frequency of `item` in peer `l`'s implicit stream.
    pub fn freq(&self, peer: u32, item: u32) -> f64 {
        self.freqs[peer as usize].get(&item).copied().unwrap_or(0.0)
    }
}

/// Replaces columns `i` and `j` of the ghost matrix by their component-wise
/// mean; all other columns are untouched.
pub fn ghost_step(ghost: &mut GhostTracker, i: u32, j: u32) {
    let (i, j) = (i as usize, j as usize);
    let mut keys: Vec<u32> = ghost.freqs[i].keys().copied().collect();
    keys.extend(ghost.freqs[j].keys().copied().filter(|k| !ghost.freqs[i].contains_key(k)));
    for key in keys {
        let a = ghost.freqs[i].get(&key).copied().unwrap_or(0.0);
        let b = ghost.freqs[j].get(&key).copied().unwrap_or(0.0);
        let mean = (a + b) / 2.0;
        ghost.freqs[i].insert(key, mean);
        ghost.freqs[j].insert(key, mean);
    }
    let mean_len = (ghost.lengths[i] + ghost.lengths[j]) / 2.0;
    ghost.lengths[i] = mean_len;
    ghost.lengths[j] = mean_len;
}

/// Per-round aggregates captured while a simulation runs.
#[derive(Debug, Clone, Copy)]
pub struct RoundStats {
    pub round: u32,
    /// Sum of `n_avg_est` over non-dead peers.
    pub sum_n_est: f64,
    /// Sum of `q_est` over non-dead peers.
    pub sum_q_est: f64,
    /// Sample variance of `n_avg_est` over non-dead peers.
    pub var_n_est: f64,
    pub online: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RunTrace {
    /// Row 0 describes the initial state, row `r` the state after round `r`.
    pub per_round: Vec<RoundStats>,
}

/// One simulation universe: peer states, overlay, availability, scheduling
/// randomness, and the optional exact tracker.
pub struct World {
    pub states: Vec<PeerState>,
    pub topology: Topology,
    pub churn: ChurnState,
    pub round: u32,
    pub events: Vec<ExchangeEvent>,
    pub ghost: Option<GhostTracker>,
    k: usize,
    fanout: Fanout,
    rng: ChaCha8Rng,
    sandwich_violations: u64,
}

impl World {
    pub fn new(
        states: Vec<PeerState>,
        topology: Topology,
        churn: ChurnState,
        k: usize,
        fanout: Fanout,
        seed: u64,
    ) -> World {
        assert_eq!(states.len(), topology.peer_count());
        assert_eq!(states.len(), churn.peer_count());
        World {
            states,
            topology,
            churn,
            round: 0,
            events: Vec::new(),
            ghost: None,
            k,
            fanout,
            rng: ChaCha8Rng::seed_from_u64(seed),
            sandwich_violations: 0,
        }
    }

    /// Builds round-0 states from per-peer local streams and wraps them in a
    /// world.
    pub fn from_local_streams(
        streams: &[Vec<u32>],
        topology: Topology,
        churn: ChurnState,
        k: usize,
        fanout: Fanout,
        seed: u64,
    ) -> World {
        let states = streams
            .iter()
            .enumerate()
            .map(|(l, stream)| protocol::init_peer(l as u32, stream, k))
            .collect();
        World::new(states, topology, churn, k, fanout, seed)
    }

    /// Turns on exact tracking of the implicit per-peer streams.
    pub fn enable_ghost(&mut self, streams: &[Vec<u32>]) {
        assert_eq!(streams.len(), self.states.len());
        self.ghost = Some(GhostTracker::from_local_streams(streams));
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Exchanges that violated the ghost sandwich so far; stays 0 unless the
    /// sketch bounds are broken.
    pub fn sandwich_violations(&self) -> u64 {
        self.sandwich_violations
    }

    /// Executes one synchronous round.
    pub fn run_round(&mut self) {
        self.churn.step(&mut self.rng);
        self.round += 1;
        let mut order = self.churn.online_peers();
        order.shuffle(&mut self.rng);
        for initiator in order {
            let targets = match self.topology.sample_fanout(initiator, self.fanout, &mut self.rng)
            {
                Ok(targets) => targets,
                Err(_) => continue, // isolated peers skip their turn
            };
            for partner in targets {
                if !self.churn.is_online(partner) {
                    // Partner failed or left: cancel, initiator unchanged.
                    self.events.push(ExchangeEvent {
                        round: self.round,
                        initiator,
                        partner,
                        completed: false,
                    });
                    continue;
                }
                let next =
                    protocol::gossip_update(&self.states[initiator as usize], &self.states[partner as usize], self.k);
                self.states[partner as usize] = PeerState {
                    peer_id: partner,
                    ..next.clone()
                };
                self.states[initiator as usize] = next;
                if let Some(ghost) = self.ghost.as_mut() {
                    ghost_step(ghost, initiator, partner);
                }
                self.events.push(ExchangeEvent {
                    round: self.round,
                    initiator,
                    partner,
                    completed: true,
                });
            }
        }
        for &peer in &self.churn.online_peers() {
            self.states[peer as usize].round = self.round;
        }
        if self.ghost.is_some() {
            self.check_sandwich();
        }
    }

    /// Runs `rounds` rounds and returns the per-round trace (with a leading
    /// row for the initial state).
    pub fn run(&mut self, rounds: u32) -> RunTrace {
        let mut trace = RunTrace::default();
        trace.per_round.push(self.stats());
        for _ in 0..rounds {
            self.run_round();
            trace.per_round.push(self.stats());
        }
        trace
    }

    pub fn stats(&self) -> RoundStats {
        let alive: Vec<&PeerState> = self
            .states
            .iter()
            .filter(|s| self.churn.status(s.peer_id) != crate::churn::PeerStatus::Dead)
            .collect();
        let count = alive.len().max(1);
        let sum_n: f64 = alive.iter().map(|s| s.n_avg_est).sum();
        let sum_q: f64 = alive.iter().map(|s| s.q_est).sum();
        let mean = sum_n / count as f64;
        let var = if alive.len() > 1 {
            alive
                .iter()
                .map(|s| (s.n_avg_est - mean) * (s.n_avg_est - mean))
                .sum::<f64>()
                / (alive.len() - 1) as f64
        } else {
            0.0
        };
        RoundStats {
            round: self.round,
            sum_n_est: sum_n,
            sum_q_est: sum_q,
            var_n_est: var,
            online: self.churn.online_count(),
        }
    }

    /// The pair sequence of completed exchanges, for replay through
    /// [`avg_merge_oracle`].
    pub fn completed_pairs(&self) -> Vec<(u32, u32)> {
        self.events
            .iter()
            .filter(|e| e.completed)
            .map(|e| (e.initiator, e.partner))
            .collect()
    }

    /// Verifies the ghost sandwich on every peer: each summary frequency
    /// must dominate the exact frequency of its implicit stream, by at most
    /// `n_avg_est / k`. The counting is deterministic.
    fn check_sandwich(&mut self) {
        let ghost = self.ghost.as_ref().expect("ghost enabled");
        for state in &self.states {
            // The tracker's lengths go through the same averaging in the
            // same order, so they must agree bit for bit.
            debug_assert_eq!(ghost.lengths[state.peer_id as usize], state.n_avg_est);
            let slack = state.n_avg_est / self.k as f64;
            for c in state.summary.counters() {
                let exact = ghost.freq(state.peer_id, c.item);
                if !(exact <= c.freq && c.freq <= exact + slack) {
                    self.sandwich_violations += 1;
                }
            }
        }
    }
}

/// Centralized replay of the distributed schedule: for each pair `(i, j)`
/// both slots are overwritten with the merged-and-halved summary. Running it
/// over the pair sequence an engine actually executed (fan-out 1, no churn)
/// reproduces the engine's summaries bit for bit, because both compose the
/// same pure exchange.
pub fn avg_merge_oracle(
    summaries: &[StreamSummary],
    k: usize,
    pairs: &[(u32, u32)],
) -> Vec<StreamSummary> {
    let mut merged: Vec<StreamSummary> = summaries.to_vec();
    for &(i, j) in pairs {
        let next = sketch::merge(&merged[i as usize], &merged[j as usize], k).scale(2.0);
        merged[i as usize] = next.clone();
        merged[j as usize] = next;
    }
    merged
}
