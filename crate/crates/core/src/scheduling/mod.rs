//! Audit cadence and cluster sampling.
//!
//! An audit round is due every `eta` service payments. Each round audits a
//! cluster of distinct live fog nodes picked by one of three policies:
//!
//! * **random**: a uniform subset;
//! * **weighted**: successive weighted sampling without replacement, with a
//!   node's weight raised on every failed audit and lowered on every pass;
//! * **BIBD**: walk a block design in which every block has `B` nodes and
//!   every node sits in exactly `B` blocks, rebuilding it whenever a node is
//!   ejected.
//!
//! Everything is generic over the node identifier so the simulation can use
//! plain indices while the protocol layer uses addresses.

mod bibd;
mod weighted;

pub use bibd::{build_bibd, BlockDesign};
pub use weighted::{sample_cluster_weighted, WeightParams, Weights};

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::AuditOutcome;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchedulingError {
    #[error("cluster of {requested} requested from {available} live nodes")]
    ClusterTooLarge { requested: usize, available: usize },
    #[error("node has no weight entry")]
    UnknownFog,
    #[error("block size {block_size} invalid for {nodes} nodes")]
    InvalidDesign { block_size: usize, nodes: usize },
    #[error("block design is empty")]
    EmptyDesign,
    #[error("invalid weight parameters: {0}")]
    InvalidWeightParams(String),
}

/// Node identifiers usable by the schedulers.
pub trait NodeId: Clone + Ord + fmt::Display {}
impl<T: Clone + Ord + fmt::Display> NodeId for T {}

/// True once every `eta` requests; never before the first request.
pub fn audit_due(request_counter: u64, eta: u64) -> bool {
    assert!(eta >= 1, "eta must be at least 1");
    request_counter > 0 && request_counter.is_multiple_of(eta)
}

pub fn sample_cluster_random<T: Clone, R: Rng + ?Sized>(
    live: &[T],
    size: usize,
    rng: &mut R,
) -> Result<Vec<T>, SchedulingError> {
    if size > live.len() {
        return Err(SchedulingError::ClusterTooLarge {
            requested: size,
            available: live.len(),
        });
    }
    Ok(index::sample(rng, live.len(), size)
        .into_iter()
        .map(|i| live[i].clone())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Random,
    Weighted,
    Bibd,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Random, Policy::Weighted, Policy::Bibd];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Random => "random",
            Policy::Weighted => "weighted",
            Policy::Bibd => "bibd",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Policy::Random),
            "weighted" => Ok(Policy::Weighted),
            "bibd" => Ok(Policy::Bibd),
            other => Err(format!("unknown policy '{other}' (random, weighted, bibd)")),
        }
    }
}

/// Per-coordinator scheduling state for one policy.
#[derive(Debug, Clone)]
pub struct SchedulerState<T: NodeId> {
    policy: Policy,
    cluster_size: usize,
    request_counter: u64,
    weights: Weights<T>,
    design: Option<BlockDesign<T>>,
}

impl<T: NodeId> SchedulerState<T> {
    pub fn new(
        policy: Policy,
        cluster_size: usize,
        live: &[T],
        weight_params: WeightParams,
    ) -> Result<Self, SchedulingError> {
        if cluster_size == 0 {
            return Err(SchedulingError::InvalidDesign {
                block_size: 0,
                nodes: live.len(),
            });
        }
        let weights = Weights::new(live, weight_params)?;
        let design = match policy {
            Policy::Bibd if !live.is_empty() => {
                Some(BlockDesign::new(live, cluster_size.min(live.len()))?)
            }
            _ => None,
        };
        Ok(Self {
            policy,
            cluster_size,
            request_counter: 0,
            weights,
            design,
        })
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn cluster_size(&self) -> usize {
        self.cluster_size
    }

    pub fn weights(&self) -> &Weights<T> {
        &self.weights
    }

    pub fn design(&self) -> Option<&BlockDesign<T>> {
        self.design.as_ref()
    }

    /// Counts one service request; returns whether an audit round is due.
    pub fn record_request(&mut self, eta: u64) -> bool {
        self.request_counter += 1;
        audit_due(self.request_counter, eta)
    }

    pub fn request_counter(&self) -> u64 {
        self.request_counter
    }

    /// Next cluster of `min(C, |live|)` distinct live nodes. `live` must be
    /// kept in sync with [`Self::on_eject`].
    pub fn next_cluster<R: Rng + ?Sized>(
        &mut self,
        live: &[T],
        rng: &mut R,
    ) -> Result<Vec<T>, SchedulingError> {
        let size = self.cluster_size.min(live.len());
        match self.policy {
            Policy::Random => sample_cluster_random(live, size, rng),
            Policy::Weighted => sample_cluster_weighted(live, &self.weights, size, rng),
            Policy::Bibd => match &mut self.design {
                Some(d) => d.next_cluster(),
                None if live.is_empty() => Ok(Vec::new()),
                None => Err(SchedulingError::EmptyDesign),
            },
        }
    }

    /// Feeds an audit verdict back into the weighted policy; other
    /// policies ignore history.
    pub fn record_outcome(&mut self, node: &T, outcome: AuditOutcome) -> Result<(), SchedulingError> {
        if self.policy == Policy::Weighted {
            self.weights.update_weight(node, outcome)?;
        }
        Ok(())
    }

    /// Drops an ejected node; the block design is rebuilt over `live_after`.
    pub fn on_eject(&mut self, node: &T, live_after: &[T]) -> Result<(), SchedulingError> {
        self.weights.remove(node);
        if self.policy == Policy::Bibd {
            self.design = if live_after.is_empty() {
                None
            } else {
                Some(BlockDesign::new(
                    live_after,
                    self.cluster_size.min(live_after.len()),
                )?)
            };
        }
        Ok(())
    }

    /// Current weights (weighted policy) or blocks (BIBD) as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        match (&self.design, self.policy) {
            (Some(d), Policy::Bibd) => d.write_csv(out),
            _ => self.weights.write_csv(out),
        }
    }
}

#[cfg(test)]
mod tests;
