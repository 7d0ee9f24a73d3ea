//! In-process emulation of the identity and integrity contract.
//!
//! The ledger owns three lookup tables (IoT devices, fog nodes, oracles),
//! the pooled funds behind them and the oracle fee pool. Every externally
//! submitted call is authenticated by recovering the caller's key from an
//! ECDSA signature; audit verdicts additionally carry a ring signature that
//! must verify and whose members must all be registered IoT devices.
//!
//! Operations are applied in a single total order and are atomic: every
//! check runs before the first mutation, so a failed call leaves the ledger
//! bit-identical.
//!
//! Currency is integer atomic units. Funds are never moved between
//! participants, only re-attributed inside the pool; the conservation
//! invariant ties the pool to the external flows:
//!
//! ```text
//! deposited - paid_out = Σ iot.avail_funds + Σ (fog.deposit + fog.avail_funds) + fee_pool
//! ```

mod call;
mod event;
mod params;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use call::{
    audit_statement, random_audit_id, AuditProof, Call, Op, Transaction, Verdict,
};
pub use event::{write_events_csv, Event, EventKind, EVENT_CSV_HEADER};
pub use params::{Params, PPM};

use crate::crypto::{self, Address, PublicKey, Signature};

pub type Amount = u64;
pub type Reputation = i64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("signature does not recover to a caller")]
    BadSignature,
    #[error("address already registered")]
    AlreadyRegistered,
    #[error("address not registered")]
    NotRegistered,
    #[error("amount must be positive")]
    InvalidAmount,
    #[error("insufficient available funds")]
    InsufficientFunds,
    #[error("deposit {offered} below required collateral {required}")]
    InsufficientDeposit { required: Amount, offered: Amount },
    #[error("caller is not a registered oracle")]
    UnknownOracle,
    #[error("fog node not registered")]
    UnknownFog,
    #[error("ring signature does not verify")]
    InvalidRingSignature,
    #[error("ring member {0} is not a registered IoT device")]
    RingMemberNotInIoTTable(Address),
    #[error("audit id already used")]
    ReplayedAudit,
    #[error("conservation violated: pool holds {held}, net inflow {net}")]
    ConservationViolated { held: u128, net: u128 },
    #[error("snapshot: {0}")]
    Snapshot(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IotRecord {
    pub address: Address,
    /// Recovered at registration; ring signatures are built over these keys.
    /// Absent only for records created through [`Ledger::apply_preverified`].
    pub public_key: Option<PublicKey>,
    pub avail_funds: Amount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FogRecord {
    pub address: Address,
    pub deposit: Amount,
    pub avail_funds: Amount,
    pub reputation: Reputation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RemovalReason {
    SelfInitiated,
    ReputationFloor,
    DepositExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Removal {
    pub address: Address,
    pub reason: RemovalReason,
    pub payout: Amount,
}

/// Totals that crossed the contract boundary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalFlows {
    pub deposited: Amount,
    pub paid_out: Amount,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Receipt {
    /// Funds sent to the caller.
    pub payout: Amount,
    pub fog_removed: Option<Removal>,
    pub oracle_payout: Amount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ledger {
    params: Params,
    iots: BTreeMap<Address, IotRecord>,
    fogs: BTreeMap<Address, FogRecord>,
    oracles: BTreeSet<Address>,
    fee_pool: Amount,
    flows: ExternalFlows,
    request_counter: u64,
    spent_audits: BTreeSet<String>,
    events: Vec<Event>,
}

impl Ledger {
    pub fn initialize(params: Params) -> Result<Self, LedgerError> {
        params.validate()?;
        let mut ledger = Self {
            params,
            iots: BTreeMap::new(),
            fogs: BTreeMap::new(),
            oracles: BTreeSet::new(),
            fee_pool: 0,
            flows: ExternalFlows::default(),
            request_counter: 0,
            spent_audits: BTreeSet::new(),
            events: Vec::new(),
        };
        ledger.log(Event::new(EventKind::Initialize));
        Ok(ledger)
    }

    // -- views ---------------------------------------------------------------

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn iot(&self, address: &Address) -> Option<&IotRecord> {
        self.iots.get(address)
    }

    pub fn fog(&self, address: &Address) -> Option<&FogRecord> {
        self.fogs.get(address)
    }

    pub fn is_oracle(&self, address: &Address) -> bool {
        self.oracles.contains(address)
    }

    pub fn iots(&self) -> impl Iterator<Item = &IotRecord> {
        self.iots.values()
    }

    pub fn fogs(&self) -> impl Iterator<Item = &FogRecord> {
        self.fogs.values()
    }

    pub fn iot_count(&self) -> usize {
        self.iots.len()
    }

    pub fn fog_count(&self) -> usize {
        self.fogs.len()
    }

    pub fn oracle_count(&self) -> usize {
        self.oracles.len()
    }

    pub fn fee_pool(&self) -> Amount {
        self.fee_pool
    }

    pub fn flows(&self) -> ExternalFlows {
        self.flows
    }

    /// Service payments processed so far; drives the audit cadence.
    pub fn request_counter(&self) -> u64 {
        self.request_counter
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    // -- invariants and snapshots ---------------------------------------------

    pub fn held_funds(&self) -> u128 {
        let iot: u128 = self.iots.values().map(|r| r.avail_funds as u128).sum();
        let fog: u128 = self
            .fogs
            .values()
            .map(|r| r.deposit as u128 + r.avail_funds as u128)
            .sum();
        iot + fog + self.fee_pool as u128
    }

    pub fn check_conservation(&self) -> Result<(), LedgerError> {
        let held = self.held_funds();
        let net = self.flows.deposited as u128 - self.flows.paid_out as u128;
        if held == net {
            Ok(())
        } else {
            Err(LedgerError::ConservationViolated { held, net })
        }
    }

    pub fn to_snapshot_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ledger state is plain data")
    }

    pub fn from_snapshot_json(text: &str) -> Result<Self, LedgerError> {
        let ledger: Ledger =
            serde_json::from_str(text).map_err(|e| LedgerError::Snapshot(e.to_string()))?;
        ledger.params.validate()?;
        ledger.check_conservation()?;
        let keys_consistent = ledger.iots.iter().all(|(a, r)| {
            r.address == *a && r.public_key.is_none_or(|k| k.address() == *a)
        }) && ledger.fogs.iter().all(|(a, r)| r.address == *a);
        if !keys_consistent {
            return Err(LedgerError::Snapshot("record keyed under wrong address".into()));
        }
        Ok(ledger)
    }

    // -- authenticated entry point ------------------------------------------

    /// Recovers the caller, checks any audit proof, then applies the call.
    pub fn submit(&mut self, tx: &Transaction) -> Result<Receipt, LedgerError> {
        let caller_key = crypto::recover(&tx.call.message(), &tx.signature)
            .map_err(|_| LedgerError::BadSignature)?;
        let caller = caller_key.address();
        let audit_id = match &tx.call {
            Call::FogReward { fog, proof } => {
                self.check_audit_proof(&caller, fog, Verdict::Passed, proof)?;
                Some(proof.audit_id)
            }
            Call::FogPenalize { fog, proof } => {
                self.check_audit_proof(&caller, fog, Verdict::Failed, proof)?;
                Some(proof.audit_id)
            }
            _ => None,
        };
        let receipt = self.execute(caller, tx.call.op(), Some(caller_key))?;
        if let Some(id) = audit_id {
            self.spent_audits.insert(hex::encode(id));
        }
        Ok(receipt)
    }

    /// Applies a state transition for a caller whose authorization was
    /// established out of band. Skips signature and ring-proof checks, nothing
    /// else; simulation harnesses use it to run the contract logic at scale.
    pub fn apply_preverified(&mut self, caller: Address, op: Op) -> Result<Receipt, LedgerError> {
        self.execute(caller, op, None)
    }

    fn check_audit_proof(
        &self,
        caller: &Address,
        fog: &Address,
        verdict: Verdict,
        proof: &AuditProof,
    ) -> Result<(), LedgerError> {
        if !self.oracles.contains(caller) {
            return Err(LedgerError::UnknownOracle);
        }
        if !self.fogs.contains_key(fog) {
            return Err(LedgerError::UnknownFog);
        }
        if self.spent_audits.contains(&hex::encode(proof.audit_id)) {
            return Err(LedgerError::ReplayedAudit);
        }
        let statement = audit_statement(verdict, fog, &proof.audit_id);
        if !matches!(crypto::ring_verify(&statement, &proof.ring), Ok(true)) {
            return Err(LedgerError::InvalidRingSignature);
        }
        for member in proof.ring.ring() {
            let a = member.address();
            if !self.iots.contains_key(&a) {
                return Err(LedgerError::RingMemberNotInIoTTable(a));
            }
        }
        Ok(())
    }

    // -- named contract functions -------------------------------------------

    fn submit_call(&mut self, call: Call, sig: &Signature) -> Result<Receipt, LedgerError> {
        self.submit(&Transaction {
            call,
            signature: *sig,
        })
    }

    pub fn iot_registration(&mut self, deposit: Amount, sig: &Signature) -> Result<(), LedgerError> {
        self.submit_call(Call::IotRegistration { deposit }, sig).map(drop)
    }

    pub fn fog_registration(&mut self, deposit: Amount, sig: &Signature) -> Result<(), LedgerError> {
        self.submit_call(Call::FogRegistration { deposit }, sig).map(drop)
    }

    pub fn oracle_registration(&mut self, sig: &Signature) -> Result<(), LedgerError> {
        self.submit_call(Call::OracleRegistration, sig).map(drop)
    }

    pub fn iot_add_funds(&mut self, amount: Amount, sig: &Signature) -> Result<(), LedgerError> {
        self.submit_call(Call::IotAddFunds { amount }, sig).map(drop)
    }

    pub fn iot_withdraw_funds(
        &mut self,
        amount: Amount,
        sig: &Signature,
    ) -> Result<Amount, LedgerError> {
        self.submit_call(Call::IotWithdrawFunds { amount }, sig)
            .map(|r| r.payout)
    }

    pub fn fog_withdraw_funds(
        &mut self,
        amount: Amount,
        sig: &Signature,
    ) -> Result<Amount, LedgerError> {
        self.submit_call(Call::FogWithdrawFunds { amount }, sig)
            .map(|r| r.payout)
    }

    pub fn iot_remove(&mut self, sig: &Signature) -> Result<Amount, LedgerError> {
        self.submit_call(Call::IotRemove, sig).map(|r| r.payout)
    }

    pub fn fog_remove(&mut self, sig: &Signature) -> Result<Amount, LedgerError> {
        self.submit_call(Call::FogRemove, sig).map(|r| r.payout)
    }

    pub fn iot_fog_payment(
        &mut self,
        fog: Address,
        amount: Amount,
        request_digest: [u8; 32],
        sig: &Signature,
    ) -> Result<(), LedgerError> {
        self.submit_call(
            Call::IotFogPayment {
                fog,
                amount,
                request_digest,
            },
            sig,
        )
        .map(drop)
    }

    pub fn fog_reward(
        &mut self,
        fog: Address,
        proof: AuditProof,
        sig: &Signature,
    ) -> Result<Receipt, LedgerError> {
        self.submit_call(Call::FogReward { fog, proof }, sig)
    }

    pub fn fog_penalize(
        &mut self,
        fog: Address,
        proof: AuditProof,
        sig: &Signature,
    ) -> Result<Receipt, LedgerError> {
        self.submit_call(Call::FogPenalize { fog, proof }, sig)
    }

    // -- state machine --------------------------------------------------------

    fn execute(
        &mut self,
        caller: Address,
        op: Op,
        caller_key: Option<PublicKey>,
    ) -> Result<Receipt, LedgerError> {
        match op {
            Op::IotRegistration { deposit } => {
                positive(deposit)?;
                if self.iots.contains_key(&caller) {
                    return Err(LedgerError::AlreadyRegistered);
                }
                self.iots.insert(
                    caller,
                    IotRecord {
                        address: caller,
                        public_key: caller_key,
                        avail_funds: deposit,
                    },
                );
                self.flows.deposited += deposit;
                let mut e = Event::new(EventKind::IotRegistration);
                e.caller = Some(caller);
                e.amount = deposit;
                e.caller_funds = Some(deposit);
                self.log(e);
                Ok(Receipt::default())
            }
            Op::FogRegistration { deposit } => {
                let required = self.params.deposit;
                if deposit < required {
                    return Err(LedgerError::InsufficientDeposit {
                        required,
                        offered: deposit,
                    });
                }
                if self.fogs.contains_key(&caller) {
                    return Err(LedgerError::AlreadyRegistered);
                }
                let record = FogRecord {
                    address: caller,
                    deposit: required,
                    avail_funds: deposit - required,
                    reputation: self.params.r_init,
                };
                let mut e = Event::new(EventKind::FogRegistration);
                e.caller = Some(caller);
                e.amount = deposit;
                e.caller_funds = Some(record.avail_funds);
                e.target = Some(caller);
                e.target_deposit = Some(record.deposit);
                e.target_reputation = Some(record.reputation);
                self.fogs.insert(caller, record);
                self.flows.deposited += deposit;
                self.log(e);
                Ok(Receipt::default())
            }
            Op::OracleRegistration => {
                if !self.oracles.insert(caller) {
                    return Err(LedgerError::AlreadyRegistered);
                }
                let mut e = Event::new(EventKind::OracleRegistration);
                e.caller = Some(caller);
                self.log(e);
                Ok(Receipt::default())
            }
            Op::IotAddFunds { amount } => {
                let record = self.iots.get_mut(&caller).ok_or(LedgerError::NotRegistered)?;
                positive(amount)?;
                record.avail_funds += amount;
                let funds = record.avail_funds;
                self.flows.deposited += amount;
                let mut e = Event::new(EventKind::IotAddFunds);
                e.caller = Some(caller);
                e.amount = amount;
                e.caller_funds = Some(funds);
                self.log(e);
                Ok(Receipt::default())
            }
            Op::IotWithdrawFunds { amount } => {
                let record = self.iots.get_mut(&caller).ok_or(LedgerError::NotRegistered)?;
                positive(amount)?;
                if amount > record.avail_funds {
                    return Err(LedgerError::InsufficientFunds);
                }
                record.avail_funds -= amount;
                let funds = record.avail_funds;
                self.flows.paid_out += amount;
                let mut e = Event::new(EventKind::IotWithdrawFunds);
                e.caller = Some(caller);
                e.amount = amount;
                e.payout = amount;
                e.caller_funds = Some(funds);
                self.log(e);
                Ok(Receipt {
                    payout: amount,
                    ..Receipt::default()
                })
            }
            Op::FogWithdrawFunds { amount } => {
                let record = self.fogs.get_mut(&caller).ok_or(LedgerError::NotRegistered)?;
                positive(amount)?;
                if amount > record.avail_funds {
                    return Err(LedgerError::InsufficientFunds);
                }
                record.avail_funds -= amount;
                let funds = record.avail_funds;
                self.flows.paid_out += amount;
                let mut e = Event::new(EventKind::FogWithdrawFunds);
                e.caller = Some(caller);
                e.amount = amount;
                e.payout = amount;
                e.caller_funds = Some(funds);
                self.log(e);
                Ok(Receipt {
                    payout: amount,
                    ..Receipt::default()
                })
            }
            Op::IotRemove => {
                let record = self.iots.remove(&caller).ok_or(LedgerError::NotRegistered)?;
                self.flows.paid_out += record.avail_funds;
                let mut e = Event::new(EventKind::IotRemove);
                e.caller = Some(caller);
                e.payout = record.avail_funds;
                self.log(e);
                Ok(Receipt {
                    payout: record.avail_funds,
                    ..Receipt::default()
                })
            }
            Op::FogRemove => {
                if !self.fogs.contains_key(&caller) {
                    return Err(LedgerError::NotRegistered);
                }
                let removal = self.remove_fog(&caller, RemovalReason::SelfInitiated, Some(caller));
                Ok(Receipt {
                    payout: removal.payout,
                    fog_removed: Some(removal),
                    oracle_payout: 0,
                })
            }
            Op::IotFogPayment { fog, amount } => {
                if !self.fogs.contains_key(&fog) {
                    return Err(LedgerError::NotRegistered);
                }
                let payer = self.iots.get_mut(&caller).ok_or(LedgerError::NotRegistered)?;
                positive(amount)?;
                if amount > payer.avail_funds {
                    return Err(LedgerError::InsufficientFunds);
                }
                let fee = self.params.fee_on(amount);
                payer.avail_funds -= amount;
                let payer_funds = payer.avail_funds;
                let payee = self.fogs.get_mut(&fog).expect("checked above");
                payee.avail_funds += amount - fee;
                let payee_funds = payee.avail_funds;
                self.fee_pool += fee;
                self.request_counter += 1;
                let mut e = Event::new(EventKind::IotFogPayment);
                e.caller = Some(caller);
                e.target = Some(fog);
                e.amount = amount;
                e.fee = fee;
                e.caller_funds = Some(payer_funds);
                e.target_funds = Some(payee_funds);
                self.log(e);
                Ok(Receipt::default())
            }
            Op::FogReward { fog } => {
                self.check_oracle_and_fog(&caller, &fog)?;
                let r_max = self.params.r_max;
                let r_plus = self.params.r_plus;
                let record = self.fogs.get_mut(&fog).expect("checked above");
                record.reputation = (record.reputation + r_plus).min(r_max);
                let mut e = fog_event(EventKind::FogReward, caller, record);
                e.fee_pool = self.fee_pool;
                self.log(e);
                let oracle_payout = self.pay_oracle(caller);
                Ok(Receipt {
                    oracle_payout,
                    ..Receipt::default()
                })
            }
            Op::FogPenalize { fog } => {
                self.check_oracle_and_fog(&caller, &fog)?;
                let r_min = self.params.r_min;
                let r_minus = self.params.r_minus;
                let deduction = self.params.deposit_deduction;
                let record = self.fogs.get_mut(&fog).expect("checked above");
                record.reputation -= r_minus;
                let lost = record.deposit.min(deduction);
                record.deposit -= lost;
                let trigger = if record.reputation < r_min {
                    Some(RemovalReason::ReputationFloor)
                } else if record.deposit == 0 {
                    Some(RemovalReason::DepositExhausted)
                } else {
                    None
                };
                let mut e = fog_event(EventKind::FogPenalize, caller, record);
                e.amount = lost;
                self.log(e);
                if lost > 0 {
                    self.distribute_deposit(lost);
                }
                let fog_removed = trigger.map(|reason| self.remove_fog(&fog, reason, None));
                let oracle_payout = self.pay_oracle(caller);
                Ok(Receipt {
                    payout: 0,
                    fog_removed,
                    oracle_payout,
                })
            }
        }
    }

    fn check_oracle_and_fog(&self, caller: &Address, fog: &Address) -> Result<(), LedgerError> {
        if !self.oracles.contains(caller) {
            return Err(LedgerError::UnknownOracle);
        }
        if !self.fogs.contains_key(fog) {
            return Err(LedgerError::UnknownFog);
        }
        Ok(())
    }

    /// Contract-internal removal of a fog node, as triggered by the penalty
    /// rules; returns the remaining deposit and funds to the node's owner.
    pub fn force_remove_fog(
        &mut self,
        fog: &Address,
        reason: RemovalReason,
    ) -> Result<Removal, LedgerError> {
        if !self.fogs.contains_key(fog) {
            return Err(LedgerError::NotRegistered);
        }
        Ok(self.remove_fog(fog, reason, None))
    }

    /// Splits forfeited collateral equally over every registered IoT device.
    /// The integer remainder (or everything, if there are no devices) goes
    /// to the fee pool.
    fn distribute_deposit(&mut self, amount: Amount) {
        let n = self.iots.len() as Amount;
        let (share, remainder) = match amount.checked_div(n) {
            Some(share) => (share, amount % n),
            None => (0, amount),
        };
        if share > 0 {
            for record in self.iots.values_mut() {
                record.avail_funds += share;
            }
        }
        self.fee_pool += remainder;
        let mut e = Event::new(EventKind::DistributeDeposit);
        e.amount = amount;
        e.payout = share;
        e.fee = remainder;
        self.log(e);
    }

    /// Deletes a fog record, returning its remaining deposit and funds.
    fn remove_fog(
        &mut self,
        fog: &Address,
        reason: RemovalReason,
        caller: Option<Address>,
    ) -> Removal {
        let record = self.fogs.remove(fog).expect("caller checked presence");
        let payout = record.deposit + record.avail_funds;
        self.flows.paid_out += payout;
        let kind = match reason {
            RemovalReason::SelfInitiated => EventKind::FogRemove,
            RemovalReason::ReputationFloor => EventKind::FogRemoveReputationFloor,
            RemovalReason::DepositExhausted => EventKind::FogRemoveDepositExhausted,
        };
        let mut e = Event::new(kind);
        e.caller = caller;
        e.target = Some(*fog);
        e.payout = payout;
        e.target_reputation = Some(record.reputation);
        self.log(e);
        Removal {
            address: *fog,
            reason,
            payout,
        }
    }

    fn pay_oracle(&mut self, oracle: Address) -> Amount {
        let due = self.params.oracle_reimbursement + self.params.oracle_bounty;
        let paid = due.min(self.fee_pool);
        if paid > 0 {
            self.fee_pool -= paid;
            self.flows.paid_out += paid;
            let mut e = Event::new(EventKind::OraclePayout);
            e.caller = Some(oracle);
            e.payout = paid;
            self.log(e);
        }
        paid
    }

    fn log(&mut self, mut event: Event) {
        event.seq = self.events.len() as u64;
        event.fee_pool = self.fee_pool;
        self.events.push(event);
    }
}

fn positive(amount: Amount) -> Result<(), LedgerError> {
    if amount == 0 {
        Err(LedgerError::InvalidAmount)
    } else {
        Ok(())
    }
}

fn fog_event(kind: EventKind, caller: Address, record: &FogRecord) -> Event {
    let mut e = Event::new(kind);
    e.caller = Some(caller);
    e.target = Some(record.address);
    e.target_funds = Some(record.avail_funds);
    e.target_deposit = Some(record.deposit);
    e.target_reputation = Some(record.reputation);
    e
}

#[cfg(test)]
mod tests;
