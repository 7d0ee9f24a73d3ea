use serde::{Deserialize, Serialize};

use super::{Amount, LedgerError, Reputation};

pub const PPM: u64 = 1_000_000;

/// Contract-wide constants fixed at initialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub r_min: Reputation,
    pub r_init: Reputation,
    pub r_max: Reputation,
    /// Reputation gained per passed audit.
    pub r_plus: Reputation,
    /// Reputation lost per failed audit; strictly larger than `r_plus`.
    pub r_minus: Reputation,
    /// Collateral every fog node stakes.
    pub deposit: Amount,
    /// Collateral lost per failed audit.
    pub deposit_deduction: Amount,
    /// Share of each service payment kept for the oracle pool, in parts per million.
    pub fee_rate_ppm: u64,
    /// One audit is due every `eta` service payments.
    pub eta: u64,
    /// Paid from the fee pool to the oracle after each audit verdict, covering
    /// the service payment it spent while posing as an IoT device.
    pub oracle_reimbursement: Amount,
    /// Flat per-audit reward for the oracle, on top of the reimbursement.
    pub oracle_bounty: Amount,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            r_min: 0,
            r_init: 10,
            r_max: 10,
            r_plus: 1,
            r_minus: 2,
            deposit: 3,
            deposit_deduction: 1,
            fee_rate_ppm: 10_000,
            eta: 10,
            oracle_reimbursement: 0,
            oracle_bounty: 0,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<(), LedgerError> {
        let bad = |m: &str| Err(LedgerError::InvalidParams(m.to_string()));
        if !(self.r_min <= self.r_init && self.r_init <= self.r_max) {
            return bad("require r_min <= r_init <= r_max");
        }
        if self.r_plus < 0 {
            return bad("r_plus must be nonnegative");
        }
        if self.r_minus <= self.r_plus {
            return bad("r_minus must be strictly greater than r_plus");
        }
        if self.deposit == 0 {
            return bad("deposit must be positive");
        }
        if self.deposit_deduction == 0 {
            return bad("deposit_deduction must be positive");
        }
        if self.fee_rate_ppm >= PPM {
            return bad("fee rate must be below 1");
        }
        if self.eta == 0 {
            return bad("eta must be at least 1");
        }
        Ok(())
    }

    /// Converts a fractional fee rate into parts per million, rounding to nearest.
    pub fn fee_rate_from_fraction(rate: f64) -> Result<u64, LedgerError> {
        if !(0.0..1.0).contains(&rate) {
            return Err(LedgerError::InvalidParams(format!(
                "fee rate {rate} outside [0, 1)"
            )));
        }
        Ok((rate * PPM as f64).round() as u64)
    }

    pub fn fee_on(&self, payment: Amount) -> Amount {
        ((payment as u128 * self.fee_rate_ppm as u128) / PPM as u128) as Amount
    }

    /// Number of failed audits after which collateral alone forces removal.
    pub fn penalties_to_exhaust_deposit(&self) -> u64 {
        self.deposit.div_ceil(self.deposit_deduction)
    }
}
