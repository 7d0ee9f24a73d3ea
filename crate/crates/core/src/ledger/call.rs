//! Signed ledger calls.
//!
//! A [`Call`] is what a participant signs; the ledger recovers the caller
//! from the signature over [`Call::message`]. Its [`Op`] is the bare state
//! transition once authentication has succeeded.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::Amount;
use crate::crypto::{self, Address, CryptoError, RingSignature, SecretKey, Signature};

const DOMAIN: &[u8] = b"fogaudit/call/v1";
const AUDIT_DOMAIN: &[u8] = b"fogaudit/audit/v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Passed,
    Failed,
}

impl Verdict {
    fn tag(self) -> u8 {
        match self {
            Verdict::Passed => 1,
            Verdict::Failed => 2,
        }
    }
}

/// Oracle evidence attached to a reward or penalty: a ring signature over
/// [`audit_statement`] proving the audit came from some registered IoT identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditProof {
    #[serde(with = "hex32")]
    pub audit_id: [u8; 32],
    pub ring: RingSignature,
}

/// The message an oracle ring-signs for one verdict on one fog node.
pub fn audit_statement(verdict: Verdict, fog: &Address, audit_id: &[u8; 32]) -> Vec<u8> {
    let mut m = Vec::with_capacity(AUDIT_DOMAIN.len() + 1 + 20 + 32);
    m.extend_from_slice(AUDIT_DOMAIN);
    m.push(verdict.tag());
    m.extend_from_slice(fog.as_bytes());
    m.extend_from_slice(audit_id);
    m
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Call {
    IotRegistration {
        deposit: Amount,
    },
    FogRegistration {
        deposit: Amount,
    },
    OracleRegistration,
    IotAddFunds {
        amount: Amount,
    },
    IotWithdrawFunds {
        amount: Amount,
    },
    FogWithdrawFunds {
        amount: Amount,
    },
    IotRemove,
    FogRemove,
    /// The IoT device commits to the package it paid for via `request_digest`.
    IotFogPayment {
        fog: Address,
        amount: Amount,
        request_digest: [u8; 32],
    },
    FogReward {
        fog: Address,
        proof: AuditProof,
    },
    FogPenalize {
        fog: Address,
        proof: AuditProof,
    },
}

/// State transition carried by a call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    IotRegistration { deposit: Amount },
    FogRegistration { deposit: Amount },
    OracleRegistration,
    IotAddFunds { amount: Amount },
    IotWithdrawFunds { amount: Amount },
    FogWithdrawFunds { amount: Amount },
    IotRemove,
    FogRemove,
    IotFogPayment { fog: Address, amount: Amount },
    FogReward { fog: Address },
    FogPenalize { fog: Address },
}

impl Call {
    pub fn op(&self) -> Op {
        match self {
            Call::IotRegistration { deposit } => Op::IotRegistration { deposit: *deposit },
            Call::FogRegistration { deposit } => Op::FogRegistration { deposit: *deposit },
            Call::OracleRegistration => Op::OracleRegistration,
            Call::IotAddFunds { amount } => Op::IotAddFunds { amount: *amount },
            Call::IotWithdrawFunds { amount } => Op::IotWithdrawFunds { amount: *amount },
            Call::FogWithdrawFunds { amount } => Op::FogWithdrawFunds { amount: *amount },
            Call::IotRemove => Op::IotRemove,
            Call::FogRemove => Op::FogRemove,
            Call::IotFogPayment { fog, amount, .. } => Op::IotFogPayment {
                fog: *fog,
                amount: *amount,
            },
            Call::FogReward { fog, .. } => Op::FogReward { fog: *fog },
            Call::FogPenalize { fog, .. } => Op::FogPenalize { fog: *fog },
        }
    }

    /// Canonical bytes covered by the caller's signature.
    pub fn message(&self) -> Vec<u8> {
        let mut m = DOMAIN.to_vec();
        let amount = |m: &mut Vec<u8>, tag: u8, a: Amount| {
            m.push(tag);
            m.extend_from_slice(&a.to_be_bytes());
        };
        match self {
            Call::IotRegistration { deposit } => amount(&mut m, 1, *deposit),
            Call::FogRegistration { deposit } => amount(&mut m, 2, *deposit),
            Call::OracleRegistration => m.push(3),
            Call::IotAddFunds { amount: a } => amount(&mut m, 4, *a),
            Call::IotWithdrawFunds { amount: a } => amount(&mut m, 5, *a),
            Call::FogWithdrawFunds { amount: a } => amount(&mut m, 6, *a),
            Call::IotRemove => m.push(7),
            Call::FogRemove => m.push(8),
            Call::IotFogPayment {
                fog,
                amount: a,
                request_digest,
            } => {
                amount(&mut m, 9, *a);
                m.extend_from_slice(fog.as_bytes());
                m.extend_from_slice(request_digest);
            }
            Call::FogReward { fog, proof } | Call::FogPenalize { fog, proof } => {
                m.push(if matches!(self, Call::FogReward { .. }) { 10 } else { 11 });
                m.extend_from_slice(fog.as_bytes());
                m.extend_from_slice(&proof.audit_id);
                m.extend_from_slice(&proof.ring.to_bytes());
            }
        }
        m
    }

    pub fn sign(self, secret: &SecretKey) -> Result<Transaction, CryptoError> {
        let signature = crypto::sign(&self.message(), secret)?;
        Ok(Transaction {
            call: self,
            signature,
        })
    }
}

/// A call plus the caller's signature over it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub call: Call,
    pub signature: Signature,
}

pub fn random_audit_id<R: RngCore + CryptoRng>(rng: &mut R) -> [u8; 32] {
    let mut id = [0u8; 32];
    rng.fill_bytes(&mut id);
    id
}

pub(crate) mod hex32 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u8; 32], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("0x{}", hex::encode(v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[u8; 32], D::Error> {
        let s = String::deserialize(d)?;
        crate::crypto::decode_hex_fixed::<32>(&s).map_err(serde::de::Error::custom)
    }
}
