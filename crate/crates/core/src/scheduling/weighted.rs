use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{NodeId, SchedulingError};
use crate::protocol::AuditOutcome;

/// Multiplicative weight update: failures multiply by `gamma_up`, passes by
/// `gamma_down`, never dropping below `floor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub gamma_up: f64,
    pub gamma_down: f64,
    pub floor: f64,
    pub initial: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        Self {
            gamma_up: 2.0,
            gamma_down: 0.5,
            floor: 1.0,
            initial: 1.0,
        }
    }
}

impl WeightParams {
    pub fn validate(&self) -> Result<(), SchedulingError> {
        let bad = |m: &str| Err(SchedulingError::InvalidWeightParams(m.into()));
        let finite = [self.gamma_up, self.gamma_down, self.floor, self.initial]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return bad("all values must be finite");
        }
        if self.floor <= 0.0 || self.initial < self.floor {
            return bad("require 0 < floor <= initial");
        }
        if self.gamma_up < 1.0 || !(0.0..=1.0).contains(&self.gamma_down) || self.gamma_down == 0.0 {
            return bad("require gamma_up >= 1 and 0 < gamma_down <= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Weights<T: NodeId> {
    params: WeightParams,
    map: BTreeMap<T, f64>,
}

impl<T: NodeId> Weights<T> {
    pub fn new(nodes: &[T], params: WeightParams) -> Result<Self, SchedulingError> {
        params.validate()?;
        Ok(Self {
            params,
            map: nodes.iter().map(|n| (n.clone(), params.initial)).collect(),
        })
    }

    pub fn get(&self, node: &T) -> Option<f64> {
        self.map.get(node).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn update_weight(&mut self, node: &T, outcome: AuditOutcome) -> Result<f64, SchedulingError> {
        let p = self.params;
        let w = self.map.get_mut(node).ok_or(SchedulingError::UnknownFog)?;
        *w = match outcome {
            AuditOutcome::Failed => *w * p.gamma_up,
            AuditOutcome::Passed => (*w * p.gamma_down).max(p.floor),
        };
        Ok(*w)
    }

    pub(crate) fn remove(&mut self, node: &T) {
        self.map.remove(node);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "node,weight")?;
        for (n, w) in &self.map {
            writeln!(out, "{n},{w}")?;
        }
        Ok(())
    }
}

/// Draws `size` distinct nodes, each step picking among the remaining nodes
/// with probability proportional to weight.
///
/// Backed by `rand`'s exponential-key sampler, which has exactly the law of
/// successive weighted draws without replacement.
pub fn sample_cluster_weighted<T: NodeId, R: Rng + ?Sized>(
    live: &[T],
    weights: &Weights<T>,
    size: usize,
    rng: &mut R,
) -> Result<Vec<T>, SchedulingError> {
    if size > live.len() {
        return Err(SchedulingError::ClusterTooLarge {
            requested: size,
            available: live.len(),
        });
    }
    let w: Vec<f64> = live
        .iter()
        .map(|n| weights.get(n).ok_or(SchedulingError::UnknownFog))
        .collect::<Result<_, _>>()?;
    let idx: Vec<usize> = (0..live.len()).collect();
    let picked = idx
        .choose_multiple_weighted(rng, size, |&i| w[i])
        .map_err(|e| SchedulingError::InvalidWeightParams(e.to_string()))?;
    Ok(picked.map(|&i| live[i].clone()).collect())
}
