//! One simulated system: a ledger, a fog population with behaviours, an
//! oracle and a scheduler, plus the per-trial random streams.
//!
//! Randomness is split into independent streams (setup, fog behaviour,
//! scheduling, crypto/traffic) derived from the scenario seed and the trial
//! index, so switching policy or execution mode never shifts the draws seen
//! by the other components.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::behavior::{adapt_on_penalty, fog_respond, reference_service, FogBehavior};
use super::config::{BehaviorStreams, ExecutionMode, ScenarioConfig};
use super::SimulationError;
use crate::crypto::{self, Address, KeyPair};
use crate::ledger::{Amount, Call, Ledger, Op, Receipt};
use crate::protocol::{
    select_ring_members, service_audit, AuditOutcome, FogAgent, FogResponse, Link, OracleAgent,
    ServiceFn,
};
use crate::scheduling::{Policy, SchedulerState};

const IOT_FUNDS: Amount = 1_000_000;

pub(crate) fn stream(seed: u64, trial: u64, label: &str) -> ChaCha20Rng {
    ChaCha20Rng::from_seed(crypto::hash_parts(&[
        b"fogaudit/sim",
        &seed.to_be_bytes(),
        &trial.to_be_bytes(),
        label.as_bytes(),
    ]))
}

enum BehaviorRng {
    Shared(Box<ChaCha20Rng>),
    PerFog(Vec<ChaCha20Rng>),
}

impl BehaviorRng {
    fn for_fog(&mut self, fog: usize) -> &mut ChaCha20Rng {
        match self {
            BehaviorRng::Shared(r) => r,
            BehaviorRng::PerFog(v) => &mut v[fog],
        }
    }
}

struct FullEngine {
    fogs: Vec<FogAgent>,
    oracle: OracleAgent,
    crypto: ChaCha20Rng,
}

pub(crate) struct Trial {
    ring_size: usize,
    adapt_rule: super::behavior::AdaptRule,
    audit_payment: Amount,
    pub(crate) ledger: Ledger,
    addresses: Vec<Address>,
    behaviors: Vec<FogBehavior>,
    pub(crate) live: Vec<usize>,
    scheduler: SchedulerState<usize>,
    behavior_rng: BehaviorRng,
    sched_rng: ChaCha20Rng,
    pub(crate) aux_rng: ChaCha20Rng,
    oracle_iot: Address,
    oracle: Address,
    pub(crate) iots: Vec<Address>,
    engine: Option<FullEngine>,
    sum_m: f64,
    sum_r: i64,
    pub(crate) audits: u64,
}

fn registered(ledger: &mut Ledger, caller: Address, op: Op) -> Result<(), SimulationError> {
    ledger.apply_preverified(caller, op)?;
    Ok(())
}

fn signed(ledger: &mut Ledger, keys: &KeyPair, call: Call) -> Result<(), SimulationError> {
    let tx = call
        .sign(keys.secret())
        .map_err(|e| SimulationError::Protocol(e.into()))?;
    ledger.submit(&tx)?;
    Ok(())
}

impl Trial {
    pub(crate) fn new(
        cfg: &ScenarioConfig,
        policy: Policy,
        cluster_size: usize,
        trial: u64,
    ) -> Result<Self, SimulationError> {
        let mut setup = stream(cfg.seed, trial, "setup");
        let behaviors: Vec<FogBehavior> = (0..cfg.num_fogs)
            .map(|_| {
                let m = if cfg.malicious_min == cfg.malicious_max {
                    cfg.malicious_min
                } else {
                    setup.gen_range(cfg.malicious_min..=cfg.malicious_max)
                };
                FogBehavior::new(m, cfg.adaptive)
            })
            .collect();
        let behavior_rng = match cfg.behavior_streams {
            BehaviorStreams::Shared => BehaviorRng::Shared(Box::new(stream(cfg.seed, trial, "behavior"))),
            BehaviorStreams::PerFog => BehaviorRng::PerFog(
                (0..cfg.num_fogs)
                    .map(|i| stream(cfg.seed, trial, &format!("behavior/{i}")))
                    .collect(),
            ),
        };

        let mut ledger = Ledger::initialize(cfg.ledger_params())?;
        let oracle_budget = cfg
            .audit_payment
            .saturating_mul(cfg.max_audits.max(cfg.horizon()))
            .max(1);
        let (addresses, iots, oracle_iot, oracle, engine) = match cfg.mode {
            ExecutionMode::Accounting => {
                let iots: Vec<Address> =
                    (0..cfg.num_iots as u64).map(|i| Address::synthetic("iot", i)).collect();
                for a in &iots {
                    registered(&mut ledger, *a, Op::IotRegistration { deposit: IOT_FUNDS })?;
                }
                let oracle_iot = Address::synthetic("oracle-iot", 0);
                let oracle = Address::synthetic("oracle", 0);
                registered(&mut ledger, oracle_iot, Op::IotRegistration { deposit: oracle_budget })?;
                registered(&mut ledger, oracle, Op::OracleRegistration)?;
                let fogs: Vec<Address> =
                    (0..cfg.num_fogs as u64).map(|i| Address::synthetic("fog", i)).collect();
                for a in &fogs {
                    registered(&mut ledger, *a, Op::FogRegistration { deposit: cfg.deposit })?;
                }
                (fogs, iots, oracle_iot, oracle, None)
            }
            ExecutionMode::FullProtocol => {
                let mut crypto = stream(cfg.seed, trial, "crypto");
                let iot_keys: Vec<KeyPair> =
                    (0..cfg.num_iots).map(|_| KeyPair::generate(&mut crypto)).collect();
                for k in &iot_keys {
                    signed(&mut ledger, k, Call::IotRegistration { deposit: IOT_FUNDS })?;
                }
                let omega = KeyPair::generate(&mut crypto);
                let big_omega = KeyPair::generate(&mut crypto);
                signed(&mut ledger, &omega, Call::IotRegistration { deposit: oracle_budget })?;
                signed(&mut ledger, &big_omega, Call::OracleRegistration)?;
                let service: ServiceFn = std::sync::Arc::new(reference_service);
                let mut agents = Vec::with_capacity(cfg.num_fogs);
                for _ in 0..cfg.num_fogs {
                    let k = KeyPair::generate(&mut crypto);
                    signed(&mut ledger, &k, Call::FogRegistration { deposit: cfg.deposit })?;
                    agents.push(FogAgent::new(k, service.clone()));
                }
                let (oracle_iot, oracle) = (omega.address(), big_omega.address());
                let agent = OracleAgent::new(omega, big_omega, cfg.ring_size, service)?;
                (
                    agents.iter().map(FogAgent::address).collect(),
                    iot_keys.iter().map(KeyPair::address).collect(),
                    oracle_iot,
                    oracle,
                    Some(FullEngine {
                        fogs: agents,
                        oracle: agent,
                        crypto,
                    }),
                )
            }
        };

        let live: Vec<usize> = (0..cfg.num_fogs).collect();
        let scheduler = SchedulerState::new(policy, cluster_size, &live, cfg.weight_params())?;
        let sum_m = behaviors.iter().map(FogBehavior::malicious_rate).sum();
        Ok(Self {
            ring_size: cfg.ring_size,
            adapt_rule: cfg.adapt_rule,
            audit_payment: cfg.audit_payment,
            ledger,
            addresses,
            behaviors,
            live,
            scheduler,
            behavior_rng,
            sched_rng: stream(cfg.seed, trial, "scheduling"),
            aux_rng: stream(cfg.seed, trial, "traffic"),
            oracle_iot,
            oracle,
            iots,
            engine,
            sum_m,
            sum_r: cfg.r_init * cfg.num_fogs as i64,
            audits: 0,
        })
    }

    pub(crate) fn next_cluster(&mut self) -> Result<Vec<usize>, SimulationError> {
        Ok(self.scheduler.next_cluster(&self.live, &mut self.sched_rng)?)
    }

    /// Counts one paid request; true when an audit round is due.
    pub(crate) fn record_request(&mut self, eta: u64) -> bool {
        self.scheduler.record_request(eta)
    }

    pub(crate) fn live_count(&self) -> usize {
        self.live.len()
    }

    pub(crate) fn mean_m(&self) -> Option<f64> {
        (!self.live.is_empty()).then(|| self.sum_m / self.live.len() as f64)
    }

    pub(crate) fn mean_r(&self) -> Option<f64> {
        (!self.live.is_empty()).then(|| self.sum_r as f64 / self.live.len() as f64)
    }

    pub(crate) fn fog_address(&self, fog: usize) -> Address {
        self.addresses[fog]
    }

    fn recompute_sum_m(&mut self) {
        self.sum_m = self
            .live
            .iter()
            .map(|&i| self.behaviors[i].malicious_rate())
            .sum();
    }

    /// Audits one live fog end to end and folds the result back into the
    /// behaviour model and the scheduler.
    pub(crate) fn audit(&mut self, fog: usize) -> Result<AuditOutcome, SimulationError> {
        let address = self.addresses[fog];
        let before = self
            .ledger
            .fog(&address)
            .expect("scheduler only yields live fogs")
            .reputation;
        let mut package = self.audits.to_be_bytes().to_vec();
        package.extend_from_slice(&(fog as u64).to_be_bytes());
        let reply = fog_respond(
            &self.behaviors[fog],
            &package,
            self.behavior_rng.for_fog(fog),
        );

        let (outcome, receipt) = match &mut self.engine {
            None => {
                self.ledger.apply_preverified(
                    self.oracle_iot,
                    Op::IotFogPayment {
                        fog: address,
                        amount: self.audit_payment,
                    },
                )?;
                let (outcome, op) = if reply == reference_service(&package) {
                    (AuditOutcome::Passed, Op::FogReward { fog: address })
                } else {
                    (AuditOutcome::Failed, Op::FogPenalize { fog: address })
                };
                let receipt = self.ledger.apply_preverified(self.oracle, op)?;
                (outcome, receipt)
            }
            Some(engine) => {
                let agent = &mut engine.fogs[fog];
                agent.set_behavior(Box::new(move |_, _| FogResponse::Result(reply.clone())));
                let ring = select_ring_members(
                    &self.ledger,
                    self.oracle_iot,
                    self.ring_size,
                    &mut engine.crypto,
                )?;
                let report = service_audit(
                    &engine.oracle,
                    agent,
                    &mut self.ledger,
                    &mut Link::default(),
                    &ring,
                    &package,
                    self.audit_payment,
                    &mut engine.crypto,
                )?;
                (report.outcome, report.receipt)
            }
        };
        self.audits += 1;
        self.apply_consequences(fog, before, outcome, &receipt)?;
        Ok(outcome)
    }

    fn apply_consequences(
        &mut self,
        fog: usize,
        before: i64,
        outcome: AuditOutcome,
        receipt: &Receipt,
    ) -> Result<(), SimulationError> {
        self.scheduler.record_outcome(&fog, outcome)?;
        if receipt.fog_removed.is_some() {
            self.sum_r -= before;
            self.live.retain(|&i| i != fog);
            self.scheduler.on_eject(&fog, &self.live)?;
            self.recompute_sum_m();
            return Ok(());
        }
        let after = self
            .ledger
            .fog(&self.addresses[fog])
            .expect("not removed")
            .reputation;
        self.sum_r += after - before;
        // The fog notices the penalty by watching its own ledger record.
        if after < before && self.behaviors[fog].adaptive {
            adapt_on_penalty(
                &mut self.behaviors[fog],
                self.adapt_rule,
                self.behavior_rng.for_fog(fog),
            );
            self.recompute_sum_m();
        }
        Ok(())
    }
}
