use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{Amount, Reputation};
use crate::crypto::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Initialize,
    IotRegistration,
    FogRegistration,
    OracleRegistration,
    IotAddFunds,
    IotWithdrawFunds,
    FogWithdrawFunds,
    IotRemove,
    FogRemove,
    FogRemoveReputationFloor,
    FogRemoveDepositExhausted,
    IotFogPayment,
    FogReward,
    FogPenalize,
    DistributeDeposit,
    OraclePayout,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

/// One state transition. Balance columns hold the values *after* the transition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub kind: EventKind,
    pub caller: Option<Address>,
    pub target: Option<Address>,
    pub amount: Amount,
    pub fee: Amount,
    pub payout: Amount,
    pub caller_funds: Option<Amount>,
    pub target_funds: Option<Amount>,
    pub target_deposit: Option<Amount>,
    pub target_reputation: Option<Reputation>,
    pub fee_pool: Amount,
}

impl Event {
    pub(crate) fn new(kind: EventKind) -> Self {
        Self {
            seq: 0,
            kind,
            caller: None,
            target: None,
            amount: 0,
            fee: 0,
            payout: 0,
            caller_funds: None,
            target_funds: None,
            target_deposit: None,
            target_reputation: None,
            fee_pool: 0,
        }
    }
}

pub const EVENT_CSV_HEADER: &str = "seq,op,caller_address,target_address,amount,fee,payout,\
caller_avail_after,target_avail_after,target_deposit_after,target_reputation_after,fee_pool_after";

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

pub fn write_events_csv<W: Write>(events: &[Event], mut out: W) -> io::Result<()> {
    writeln!(out, "{EVENT_CSV_HEADER}")?;
    for e in events {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            e.seq,
            e.kind,
            opt(&e.caller),
            opt(&e.target),
            e.amount,
            e.fee,
            e.payout,
            opt(&e.caller_funds),
            opt(&e.target_funds),
            opt(&e.target_deposit),
            opt(&e.target_reputation),
            e.fee_pool
        )?;
    }
    Ok(())
}
