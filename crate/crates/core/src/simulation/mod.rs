//! Monte-Carlo scenarios: audit cost until every misbehaving fog is
//! expelled, and the evolution of an adaptive fog population over time.
//!
//! Trials are independent. Each derives its own random streams from the
//! scenario seed and its index, so experiments run trials on worker threads
//! and still produce identical output for a given seed.

mod behavior;
mod config;
mod cost;
mod output;
mod state;
mod stats;
mod traffic;
mod trial;

use thiserror::Error;

pub use behavior::{adapt_on_penalty, fog_respond, reference_service, AdaptRule, FogBehavior};
pub use config::{BehaviorStreams, ExecutionMode, ScenarioConfig};
pub use cost::{run_cost_experiment, run_cost_trial, CostResults, CostRun};
pub use output::{
    write_cost_csv, write_cost_plot, write_cost_summary_csv, write_state_plot,
    write_state_series_csv, write_state_summary_csv, write_state_trials_csv,
};
pub use state::{
    run_state_experiment, run_state_trial, StateResults, StateRun, StateTrialSummary,
    TrialMetrics, RECOVERY_FRACTION,
};
pub use stats::{summarize, Summary};
pub use traffic::{run_traffic_trial, TrafficMetrics};

use crate::ledger::LedgerError;
use crate::protocol::ProtocolError;
use crate::scheduling::SchedulingError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("trial did not expel every fog within {cap} audits")]
    NonTerminating { cap: u64 },
    #[error("ledger: {0}")]
    Ledger(#[from] LedgerError),
    #[error("protocol: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("scheduling: {0}")]
    Scheduling(#[from] SchedulingError),
    #[error("worker thread panicked")]
    WorkerPanicked,
}

/// Runs `f(0) .. f(n-1)` across the available cores and returns the results
/// in index order.
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Result<Vec<T>, SimulationError>
where
    T: Send,
    F: Fn(usize) -> Result<T, SimulationError> + Sync,
{
    let workers = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(n.max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<T, SimulationError>>> = (0..n).map(|_| None).collect();
    let chunks = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= n {
                            break done;
                        }
                        done.push((i, f(i)));
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join()).collect::<Vec<_>>()
    });
    for chunk in chunks {
        for (i, r) in chunk.map_err(|_| SimulationError::WorkerPanicked)? {
            slots[i] = Some(r);
        }
    }
    slots
        .into_iter()
        .map(|s| s.expect("every index is claimed exactly once"))
        .collect()
}
