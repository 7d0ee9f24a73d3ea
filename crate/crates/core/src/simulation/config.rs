use serde::{Deserialize, Serialize};

use super::behavior::AdaptRule;
use super::SimulationError;
use crate::ledger::{Amount, Params, Reputation};
use crate::scheduling::{Policy, WeightParams};

/// How each audit is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutionMode {
    /// Ledger transitions only; callers are trusted to be who they claim.
    Accounting,
    /// Full handshake, encrypted exchange, ring signature and signed calls.
    FullProtocol,
}

/// Where fog response draws come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorStreams {
    /// One stream shared by all fogs, consumed in audit order.
    Shared,
    /// One stream per fog: a fog's k-th response is the same no matter
    /// which policy scheduled it.
    PerFog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub num_fogs: usize,
    pub num_iots: usize,
    pub policy: Policy,
    pub cluster_size: usize,
    pub deposit: Amount,
    pub d_minus: Amount,
    pub r_plus: Reputation,
    pub r_minus: Reputation,
    pub r_min: Reputation,
    pub r_init: Reputation,
    pub r_max: Reputation,
    pub eta: u64,
    pub fee_rate_ppm: u64,
    /// Service payment the oracle makes on every audit.
    pub audit_payment: Amount,
    pub trials: usize,
    pub adaptive: bool,
    pub adapt_rule: AdaptRule,
    pub seed: u64,
    /// Initial malicious rates are drawn uniformly from this range.
    pub malicious_min: f64,
    pub malicious_max: f64,
    /// Audit steps per state trial; defaults to 50 per fog.
    pub horizon: Option<u64>,
    pub gamma_up: f64,
    pub gamma_down: f64,
    pub weight_floor: f64,
    pub mode: ExecutionMode,
    pub ring_size: usize,
    pub behavior_streams: BehaviorStreams,
    /// Cost trials abort past this many audits.
    pub max_audits: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let params = Params::default();
        let weights = WeightParams::default();
        Self {
            num_fogs: 100,
            num_iots: 200,
            policy: Policy::Weighted,
            cluster_size: 5,
            deposit: params.deposit,
            d_minus: params.deposit_deduction,
            r_plus: params.r_plus,
            r_minus: params.r_minus,
            r_min: params.r_min,
            r_init: params.r_init,
            r_max: params.r_max,
            eta: params.eta,
            fee_rate_ppm: params.fee_rate_ppm,
            audit_payment: 100,
            trials: 1000,
            adaptive: false,
            adapt_rule: AdaptRule::Multiplicative,
            seed: 0,
            malicious_min: 0.4,
            malicious_max: 1.0,
            horizon: None,
            gamma_up: weights.gamma_up,
            gamma_down: weights.gamma_down,
            weight_floor: weights.floor,
            mode: ExecutionMode::Accounting,
            ring_size: 8,
            behavior_streams: BehaviorStreams::Shared,
            max_audits: 1_000_000,
        }
    }
}

impl ScenarioConfig {
    /// Defaults for the adaptive state scenario.
    pub fn state_defaults() -> Self {
        Self {
            adaptive: true,
            ..Self::default()
        }
    }

    pub fn ledger_params(&self) -> Params {
        Params {
            r_min: self.r_min,
            r_init: self.r_init,
            r_max: self.r_max,
            r_plus: self.r_plus,
            r_minus: self.r_minus,
            deposit: self.deposit,
            deposit_deduction: self.d_minus,
            fee_rate_ppm: self.fee_rate_ppm,
            eta: self.eta,
            oracle_reimbursement: 0,
            oracle_bounty: 0,
        }
    }

    pub fn weight_params(&self) -> WeightParams {
        WeightParams {
            gamma_up: self.gamma_up,
            gamma_down: self.gamma_down,
            floor: self.weight_floor,
            initial: self.weight_floor.max(1.0),
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon.unwrap_or(50 * self.num_fogs as u64)
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: String| Err(SimulationError::InvalidConfig(m));
        self.ledger_params()
            .validate()
            .map_err(|e| SimulationError::InvalidConfig(e.to_string()))?;
        self.weight_params()
            .validate()
            .map_err(|e| SimulationError::InvalidConfig(e.to_string()))?;
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.num_fogs == 0 || self.cluster_size == 0 {
            return bad("num_fogs and cluster_size must be positive".into());
        }
        if !(0.0 <= self.malicious_min
            && self.malicious_min <= self.malicious_max
            && self.malicious_max <= 1.0)
        {
            return bad(format!(
                "malicious rate range [{}, {}] not inside [0, 1]",
                self.malicious_min, self.malicious_max
            ));
        }
        if self.audit_payment == 0 || self.max_audits == 0 {
            return bad("audit_payment and max_audits must be positive".into());
        }
        if self.mode == ExecutionMode::FullProtocol
            && (self.ring_size < 2 || self.ring_size > self.num_iots + 1)
        {
            return bad(format!(
                "ring size {} needs between 2 and num_iots + 1 = {} members",
                self.ring_size,
                self.num_iots + 1
            ));
        }
        Ok(())
    }
}
