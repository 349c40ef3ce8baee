use thiserror::Error;

/// Errors surfaced by the simulation lab.
#[derive(Debug, Error)]
pub enum Error {
    /// No averaging mass ever reached this peer, so `1/q` is undefined.
    #[error("degenerate peer-count estimate: q = 0 (averaging mass never reached this peer)")]
    DegenerateEstimate,

    /// The confidence radius is >= 1, so the selection threshold would be
    /// non-positive and the probabilistic guarantees void.
    #[error("insufficient rounds: eps_star = {eps_star} >= 1")]
    InsufficientRounds { eps_star: f64 },

    /// Repeated Erdos-Renyi draws all came out disconnected.
    #[error("failed to generate a connected graph after {attempts} attempts")]
    ConnectivityFailure { attempts: u32 },

    /// The peer has no neighbors to gossip with.
    #[error("peer {peer} is isolated")]
    IsolatedPeer { peer: u32 },

    /// No finite counter budget can reach the requested tolerance in this
    /// many rounds.
    #[error("round budget {rounds} is infeasible for the requested tolerance")]
    InfeasibleRounds { rounds: u32 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
