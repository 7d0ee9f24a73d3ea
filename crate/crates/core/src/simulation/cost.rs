use serde::Serialize;

use super::config::ScenarioConfig;
use super::stats::{summarize, Summary};
use super::trial::Trial;
use super::{par_map, SimulationError};
use crate::scheduling::Policy;

/// Audits needed to expel every fog in trial `trial` of `cfg`, auditing
/// every member of each sampled cluster.
pub fn run_cost_trial(cfg: &ScenarioConfig, trial: u64) -> Result<u64, SimulationError> {
    cost_trial(cfg, cfg.policy, cfg.cluster_size, trial)
}

fn cost_trial(
    cfg: &ScenarioConfig,
    policy: Policy,
    cluster: usize,
    trial: u64,
) -> Result<u64, SimulationError> {
    if cfg.adaptive {
        return Err(SimulationError::InvalidConfig(
            "the cost scenario needs fixed malicious rates".into(),
        ));
    }
    let mut t = Trial::new(cfg, policy, cluster, trial)?;
    while t.live_count() > 0 {
        for fog in t.next_cluster()? {
            if t.audits >= cfg.max_audits {
                return Err(SimulationError::NonTerminating {
                    cap: cfg.max_audits,
                });
            }
            t.audit(fog)?;
        }
    }
    Ok(t.audits)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRun {
    pub policy: Policy,
    pub cluster_size: usize,
    /// Audits to expel everyone, indexed by trial.
    pub audits: Vec<u64>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostResults {
    pub runs: Vec<CostRun>,
}

impl CostResults {
    pub fn get(&self, policy: Policy, cluster_size: usize) -> Option<&CostRun> {
        self.runs
            .iter()
            .find(|r| r.policy == policy && r.cluster_size == cluster_size)
    }
}

/// `cfg.trials` cost trials for every policy and cluster size. Trial `i`
/// starts from the same fog population under every policy.
pub fn run_cost_experiment(
    cfg: &ScenarioConfig,
    policies: &[Policy],
    cluster_sizes: &[usize],
) -> Result<CostResults, SimulationError> {
    cfg.validate()?;
    let mut runs = Vec::new();
    for &cluster_size in cluster_sizes {
        if cluster_size == 0 {
            return Err(SimulationError::InvalidConfig("cluster size must be positive".into()));
        }
        for &policy in policies {
            let audits = par_map(cfg.trials, |i| cost_trial(cfg, policy, cluster_size, i as u64))?;
            let values: Vec<f64> = audits.iter().map(|&a| a as f64).collect();
            runs.push(CostRun {
                policy,
                cluster_size,
                summary: summarize(&values),
                audits,
            });
        }
    }
    Ok(CostResults { runs })
}
