//! Deterministic simulation lab for gossip-based mining of frequent items
//! in unstructured P2P networks.
//!
//! Every peer summarizes its local stream with a Space-Saving sketch, then
//! the peers run a push-pull averaging protocol: each exchange merges two
//! summaries, halves every frequency, and averages two auxiliary scalars
//! that estimate the mean stream length and the reciprocal of the peer
//! count. After enough rounds any single peer can be queried for the
//! network-wide frequent items, with explicit probabilistic error bounds.
//!
//! The crate is organized around that pipeline:
//!
//! - [`sketch`]: the bounded summary and its merge/scale algebra;
//! - [`protocol`]: peer state, the exchange step, and the query rule;
//! - [`topology`]: random overlays (preferential attachment, Erdos-Renyi);
//! - [`churn`]: fail-stop and alternating availability models;
//! - [`engine`]: the round scheduler, plus a centralized replay oracle and
//!   an exact ghost tracker for verification;
//! - [`workload`]: Zipfian stream generation, partitioning, exact counts;
//! - [`planner`]: closed forms tying counters, rounds, and tolerance;
//! - [`metrics`]: recall / precision / average relative error, bound checks;
//! - [`experiment`]: run and sweep orchestration with CSV output.
//!
//! Runnable walkthroughs of each capability live in `examples/`; the
//! `p2pss` binary exposes `run`, `sweep` and `plan` subcommands over the
//! same machinery. Everything is reproducible: one base seed determines
//! streams, graphs, churn schedules and gossip pairings.

pub mod churn;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod planner;
pub mod protocol;
pub(crate) mod seeds;
pub mod sketch;
pub mod topology;
pub mod workload;

pub use error::{Error, Result};
