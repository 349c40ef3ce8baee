//! The gossiping peer: local initialization, the averaging exchange, and the
//! frequent-items query with its round-dependent selection threshold.

use crate::error::{Error, Result};
use crate::planner;
use crate::sketch::{self, StreamSummary};

/// The peer whose reciprocal-count estimate starts at 1; everyone else
/// starts at 0, so the values average toward `1/p`.
pub const SEED_PEER: u32 = 0;

/// Gossip state of one peer: its summary plus the two averaged scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct PeerState {
    pub peer_id: u32,
    pub summary: StreamSummary,
    /// Estimate of the average local stream length `n / p`. Starts as the
    /// exact length of this peer's own stream.
    pub n_avg_est: f64,
    /// Estimate of `1 / p`. Starts at 1 on [`SEED_PEER`], 0 elsewhere.
    pub q_est: f64,
    /// Rounds of gossip this state has been through.
    pub round: u32,
}

/// Builds a peer's round-0 state by running the sketch over its local
/// stream. An empty stream is fine and yields an empty summary.
pub fn init_peer(peer_id: u32, local_stream: &[u32], k: usize) -> PeerState {
    PeerState {
        peer_id,
        summary: StreamSummary::from_stream(local_stream, k),
        n_avg_est: local_stream.len() as f64,
        q_est: if peer_id == SEED_PEER { 1.0 } else { 0.0 },
        round: 0,
    }
}

/// One atomic push-pull exchange: the summaries are merged and halved, the
/// scalars averaged. Both participants adopt the returned state (the caller
/// re-stamps `peer_id` for the second one); the exchange therefore conserves
/// the network-wide sums of `n_avg_est` and `q_est` exactly.
pub fn gossip_update(a: &PeerState, b: &PeerState, k: usize) -> PeerState {
    PeerState {
        peer_id: a.peer_id,
        summary: sketch::merge(&a.summary, &b.summary, k).scale(2.0),
        n_avg_est: (a.n_avg_est + b.n_avg_est) / 2.0,
        q_est: (a.q_est + b.q_est) / 2.0,
        round: a.round.max(b.round),
    }
}

/// Query-time parameters.
#[derive(Debug, Clone, Copy)]
pub struct QueryParams {
    /// Frequent-item threshold.
    pub phi: f64,
    /// Failure probability of the confidence radius.
    pub delta: f64,
    /// Upper bound on the number of peers.
    pub p_star: u64,
    /// Convergence factor of the gossip schedule.
    pub conv_factor: f64,
}

/// Frequent-item candidates reported by one peer.
#[derive(Debug, Clone)]
pub struct FrequentReport {
    /// `(item, estimated global frequency)`, sorted by item id.
    pub entries: Vec<(u32, f64)>,
    /// Selection threshold the summary frequencies were compared against.
    pub threshold: f64,
    pub eps_star: f64,
    /// Peer-count estimate used to rescale averaged frequencies.
    pub p_est: f64,
}

impl FrequentReport {
    pub fn items(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|&(item, _)| item)
    }

    pub fn contains(&self, item: u32) -> bool {
        self.entries.binary_search_by_key(&item, |e| e.0).is_ok()
    }
}

/// Selects the candidate frequent items of `state`.
///
/// The confidence radius `eps_star` shrinks the naive threshold
/// `phi * n_avg_est` by `(1 - eps_star) / (1 + eps_star)` so that no truly
/// frequent item can be missed while the estimates are still converging.
/// Reported frequencies are summary frequencies rescaled by the peer-count
/// estimate `1 / q_est`.
///
/// Fails with [`Error::DegenerateEstimate`] on a peer the averaging mass
/// never reached, and with [`Error::InsufficientRounds`] while
/// `eps_star >= 1` (the threshold would be non-positive and the guarantees
/// void).
pub fn query(state: &PeerState, params: &QueryParams) -> Result<FrequentReport> {
    let eps_star = planner::epsilon_star(
        params.p_star,
        params.delta,
        params.conv_factor,
        state.round,
    );
    if state.q_est == 0.0 {
        return Err(Error::DegenerateEstimate);
    }
    if eps_star >= 1.0 {
        return Err(Error::InsufficientRounds { eps_star });
    }
    let threshold = params.phi * state.n_avg_est * (1.0 - eps_star) / (1.0 + eps_star);
    let p_est = 1.0 / state.q_est;
    let mut entries: Vec<(u32, f64)> = state
        .summary
        .counters()
        .filter(|c| c.freq > threshold)
        .map(|c| (c.item, c.freq * p_est))
        .collect();
    entries.sort_unstable_by_key(|&(item, _)| item);
    Ok(FrequentReport {
        entries,
        threshold,
        eps_star,
        p_est,
    })
}

/// The peer-count estimate `1 / q_est`.
pub fn estimate_peers(state: &PeerState) -> Result<f64> {
    if state.q_est == 0.0 {
        return Err(Error::DegenerateEstimate);
    }
    Ok(1.0 / state.q_est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn query_params() -> QueryParams {
        QueryParams {
            phi: 0.02,
            delta: 0.05,
            p_star: 100,
            conv_factor: planner::default_convergence_factor(),
        }
    }

    #[test]
    fn init_counts_local_stream() {
        let state = init_peer(0, &[5, 5, 6], 4);
        assert_eq!(state.summary.freq(5), Some(2.0));
        assert_eq!(state.summary.freq(6), Some(1.0));
        assert_eq!(state.n_avg_est, 3.0);
        assert_eq!(state.q_est, 1.0);
        assert_eq!(state.round, 0);
    }

    #[test]
    fn init_empty_stream() {
        let state = init_peer(7, &[], 4);
        assert!(state.summary.is_empty());
        assert_eq!(state.n_avg_est, 0.0);
        assert_eq!(state.q_est, 0.0);
    }

    #[test]
    fn init_respects_sketch_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let dist = rand_distr::Zipf::new(50_000.0, 1.2).unwrap();
        let stream: Vec<u32> = (0..10_000).map(|_| rng.sample(dist) as u32).collect();
        let state = init_peer(3, &stream, 100);
        let mut counts = std::collections::HashMap::new();
        for &item in &stream {
            *counts.entry(item).or_insert(0u64) += 1;
        }
        let min = state.summary.min_freq();
        for c in state.summary.counters() {
            let exact = counts[&c.item] as f64;
            assert!(c.freq - min <= exact && exact <= c.freq);
        }
        assert!(min <= (stream.len() / 100) as f64);
    }

    #[test]
    fn exchange_averages_the_scalars() {
        let mut a = init_peer(0, &[], 4);
        let mut b = init_peer(1, &[], 4);
        a.n_avg_est = 10.0;
        b.n_avg_est = 20.0;
        let merged = gossip_update(&a, &b, 4);
        assert_eq!(merged.n_avg_est, 15.0);
        assert_eq!(merged.q_est, 0.5);
    }

    #[test]
    fn exchange_of_identical_underfull_states_is_a_fixed_point() {
        let state = init_peer(2, &[1, 1, 2], 8);
        let merged = gossip_update(&state, &state, 8);
        assert_eq!(merged.summary, state.summary);
        assert_eq!(merged.n_avg_est, state.n_avg_est);
    }

    #[test]
    fn exchange_of_disjoint_single_item_streams() {
        let a = init_peer(0, &[4; 8], 4);
        let b = init_peer(1, &[9; 4], 4);
        let merged = gossip_update(&a, &b, 4);
        assert_eq!(merged.summary.freq(4), Some(4.0));
        assert_eq!(merged.summary.freq(9), Some(2.0));
        assert_eq!(merged.n_avg_est, 6.0);
    }

    #[test]
    fn query_converged_idealization() {
        // eps_star ~ 0 at a huge round count: threshold is phi * n = 2 and
        // only the heavy item is reported, rescaled by p_est = 100.
        let mut state = init_peer(0, &[], 4);
        let mut summary = StreamSummary::new(4);
        for _ in 0..50 {
            summary.process(8);
        }
        summary.process(1);
        state.summary = summary;
        state.n_avg_est = 100.0;
        state.q_est = 0.01;
        state.round = 10_000;
        let report = query(&state, &query_params()).unwrap();
        assert!((report.threshold - 2.0).abs() < 1e-9);
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].0, 8);
        assert!((report.entries[0].1 - 5_000.0).abs() < 1e-6);
    }

    #[test]
    fn query_on_unreached_peer_is_an_error() {
        let mut state = init_peer(3, &[1, 2, 3], 4);
        state.round = 10_000;
        assert!(matches!(
            query(&state, &query_params()),
            Err(Error::DegenerateEstimate)
        ));
    }

    #[test]
    fn query_with_too_few_rounds_is_an_error() {
        let mut state = init_peer(0, &[1, 2, 3], 4);
        state.round = 1;
        let err = query(&state, &query_params()).unwrap_err();
        assert!(matches!(err, Error::InsufficientRounds { eps_star } if eps_star >= 1.0));
    }

    #[test]
    fn reported_radius_reference_value() {
        let mut state = init_peer(0, &[1], 4);
        state.round = 24;
        let mut params = query_params();
        params.p_star = 10_000;
        let report = query(&state, &params).unwrap();
        assert!((report.eps_star - 0.027063761554695046).abs() < 1e-12);
    }

    #[test]
    fn peer_estimate_is_reciprocal() {
        let mut state = init_peer(0, &[], 4);
        state.q_est = 0.001;
        assert_eq!(estimate_peers(&state).unwrap(), 1_000.0);
        state.q_est = 0.0;
        assert!(matches!(
            estimate_peers(&state),
            Err(Error::DegenerateEstimate)
        ));
    }
}
