use serde::Serialize;

use super::config::ScenarioConfig;
use super::trial::Trial;
use super::{par_map, SimulationError};
use crate::scheduling::Policy;

/// Fraction of `R_max` the mean reputation must regain to count as
/// recovered.
pub const RECOVERY_FRACTION: f64 = 0.95;

const BATCH: usize = 64;

/// Output of one trial. The series hold one entry per audit step, with
/// step 0 the state before any audit; once every fog is gone the last
/// means are carried forward.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialMetrics {
    pub total_audits: u64,
    pub mean_m: Vec<f64>,
    pub mean_r: Vec<f64>,
    pub live: Vec<usize>,
}

impl TrialMetrics {
    fn record(&mut self, t: &Trial) {
        let last_m = self.mean_m.last().copied().unwrap_or(0.0);
        let last_r = self.mean_r.last().copied().unwrap_or(0.0);
        self.mean_m.push(t.mean_m().unwrap_or(last_m));
        self.mean_r.push(t.mean_r().unwrap_or(last_r));
        self.live.push(t.live_count());
    }
}

/// Runs trial `trial` of the state scenario for `cfg.horizon()` audits.
pub fn run_state_trial(cfg: &ScenarioConfig, trial: u64) -> Result<TrialMetrics, SimulationError> {
    state_trial(cfg, cfg.policy, trial)
}

fn state_trial(cfg: &ScenarioConfig, policy: Policy, trial: u64) -> Result<TrialMetrics, SimulationError> {
    let horizon = cfg.horizon();
    let mut t = Trial::new(cfg, policy, cfg.cluster_size, trial)?;
    let mut m = TrialMetrics {
        total_audits: 0,
        mean_m: Vec::with_capacity(horizon as usize + 1),
        mean_r: Vec::with_capacity(horizon as usize + 1),
        live: Vec::with_capacity(horizon as usize + 1),
    };
    m.record(&t);
    'outer: while t.audits < horizon {
        let cluster = t.next_cluster()?;
        if cluster.is_empty() {
            break;
        }
        for fog in cluster {
            if t.audits >= horizon {
                break 'outer;
            }
            t.audit(fog)?;
            m.record(&t);
        }
    }
    m.total_audits = t.audits;
    while (m.live.len() as u64) <= horizon {
        m.record(&t);
    }
    Ok(m)
}

/// Per-trial facts extracted from a [`TrialMetrics`] series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateTrialSummary {
    pub initial_m: f64,
    pub final_m: f64,
    pub min_r: f64,
    /// First step at which the mean reputation is minimal.
    pub min_step: usize,
    pub final_r: f64,
    pub final_live: usize,
    pub live_nonincreasing: bool,
    /// The minimum comes strictly before the last step and the last value
    /// is above it.
    pub dip_recovered: bool,
    /// Steps until the mean reputation is back at `RECOVERY_FRACTION ·
    /// R_max` after its minimum: 0 if it never fell below that level, the
    /// horizon if it never came back.
    pub recovery_step: usize,
}

impl StateTrialSummary {
    pub fn from_metrics(m: &TrialMetrics, r_max: i64) -> Self {
        let last = m.mean_r.len() - 1;
        let (min_step, min_r) = m
            .mean_r
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, r)| if r < best.1 { (i, r) } else { best });
        let level = RECOVERY_FRACTION * r_max as f64;
        let recovery_step = if m.mean_r.iter().all(|&r| r >= level) {
            0
        } else {
            m.mean_r[min_step..]
                .iter()
                .position(|&r| r >= level)
                .map_or(last, |k| min_step + k)
        };
        Self {
            initial_m: m.mean_m[0],
            final_m: m.mean_m[last],
            min_r,
            min_step,
            final_r: m.mean_r[last],
            final_live: m.live[last],
            live_nonincreasing: m.live.windows(2).all(|w| w[1] <= w[0]),
            dip_recovered: min_step < last && m.mean_r[last] > min_r,
            recovery_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateRun {
    pub policy: Policy,
    /// Per-step means across trials.
    pub mean_m: Vec<f64>,
    pub mean_r: Vec<f64>,
    pub mean_live: Vec<f64>,
    pub trials: Vec<StateTrialSummary>,
}

impl StateRun {
    pub fn fraction(&self, pred: impl Fn(&StateTrialSummary) -> bool) -> f64 {
        self.trials.iter().filter(|t| pred(t)).count() as f64 / self.trials.len() as f64
    }

    pub fn mean_recovery_step(&self) -> f64 {
        self.trials.iter().map(|t| t.recovery_step as f64).sum::<f64>() / self.trials.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateResults {
    pub runs: Vec<StateRun>,
}

impl StateResults {
    pub fn get(&self, policy: Policy) -> Option<&StateRun> {
        self.runs.iter().find(|r| r.policy == policy)
    }
}

/// `cfg.trials` state trials per policy, reduced to per-step means and
/// per-trial summaries.
pub fn run_state_experiment(
    cfg: &ScenarioConfig,
    policies: &[Policy],
) -> Result<StateResults, SimulationError> {
    cfg.validate()?;
    let steps = cfg.horizon() as usize + 1;
    let mut runs = Vec::new();
    for &policy in policies {
        let mut run = StateRun {
            policy,
            mean_m: vec![0.0; steps],
            mean_r: vec![0.0; steps],
            mean_live: vec![0.0; steps],
            trials: Vec::with_capacity(cfg.trials),
        };
        // Trials are reduced in batches, and always in trial order, so the
        // sums do not depend on threading and full series are never all
        // held at once.
        for start in (0..cfg.trials).step_by(BATCH) {
            let len = BATCH.min(cfg.trials - start);
            let batch = par_map(len, |k| {
                let m = state_trial(cfg, policy, (start + k) as u64)?;
                let summary = StateTrialSummary::from_metrics(&m, cfg.r_max);
                Ok((m, summary))
            })?;
            for (m, summary) in batch {
                for s in 0..steps {
                    run.mean_m[s] += m.mean_m[s];
                    run.mean_r[s] += m.mean_r[s];
                    run.mean_live[s] += m.live[s] as f64;
                }
                run.trials.push(summary);
            }
        }
        let n = cfg.trials as f64;
        for v in [&mut run.mean_m, &mut run.mean_r, &mut run.mean_live] {
            v.iter_mut().for_each(|x| *x /= n);
        }
        runs.push(run);
    }
    Ok(StateResults { runs })
}
