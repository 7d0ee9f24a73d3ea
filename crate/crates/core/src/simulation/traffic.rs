//! Mixed traffic: IoT devices buy service from random live fogs, and every
//! `eta`-th paid request triggers an audit round over one sampled cluster.

use rand::seq::SliceRandom;
use serde::Serialize;

use super::config::ScenarioConfig;
use super::trial::Trial;
use super::SimulationError;
use crate::ledger::{Amount, Op};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrafficMetrics {
    pub requests: u64,
    pub audit_rounds: u64,
    pub audits: u64,
    pub expelled: usize,
    pub fee_pool: Amount,
}

/// Runs `requests` paid requests of `cfg.audit_payment` each, stopping early
/// once no fog is left to serve them.
pub fn run_traffic_trial(
    cfg: &ScenarioConfig,
    trial: u64,
    requests: u64,
) -> Result<TrafficMetrics, SimulationError> {
    cfg.validate()?;
    if cfg.num_iots == 0 {
        return Err(SimulationError::InvalidConfig("traffic needs IoT devices".into()));
    }
    let mut t = Trial::new(cfg, cfg.policy, cfg.cluster_size, trial)?;
    let mut served = 0;
    let mut rounds = 0;
    while served < requests && t.live_count() > 0 {
        let iot = *t.iots.choose(&mut t.aux_rng).expect("non-empty");
        let fog = *t.live.choose(&mut t.aux_rng).expect("non-empty");
        let address = t.fog_address(fog);
        t.ledger.apply_preverified(
            iot,
            Op::IotFogPayment {
                fog: address,
                amount: cfg.audit_payment,
            },
        )?;
        served += 1;
        if t.record_request(cfg.eta) {
            rounds += 1;
            for f in t.next_cluster()? {
                t.audit(f)?;
            }
        }
    }
    Ok(TrafficMetrics {
        requests: served,
        audit_rounds: rounds,
        audits: t.audits,
        expelled: cfg.num_fogs - t.live_count(),
        fee_pool: t.ledger.fee_pool(),
    })
}
