//! Disguised service audit.
//!
//! The oracle authenticates and pays exactly like an IoT device, so the fog
//! sees an ordinary request. It then compares the result with the answer it
//! computed itself and reports the verdict with its oracle identity, proving
//! the audit came from a registered device through a ring signature over a
//! random subset of the IoT table.

use rand::seq::SliceRandom;
use rand::{CryptoRng, Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::agents::{FogAgent, OracleAgent};
use super::auth::mutual_authenticate;
use super::link::Link;
use super::service::{service_exchange, ExchangeStatus, ServiceExchange};
use super::ProtocolError;
use crate::crypto::{ring_sign, Address, PublicKey};
use crate::ledger::{
    audit_statement, random_audit_id, Amount, AuditProof, Call, Ledger, Receipt, Verdict,
};

pub const DEFAULT_RING_SIZE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditOutcome {
    Passed,
    Failed,
}

#[derive(Debug, Clone)]
pub struct AuditReport {
    pub outcome: AuditOutcome,
    pub exchange: ServiceExchange,
    pub proof: AuditProof,
    pub receipt: Receipt,
}

/// Uniform random ring of `size` IoT addresses that contains `own`, in
/// random order.
pub fn select_ring_members<R: Rng + ?Sized>(
    ledger: &Ledger,
    own: Address,
    size: usize,
    rng: &mut R,
) -> Result<Vec<Address>, ProtocolError> {
    let others: Vec<Address> = ledger
        .iots()
        .map(|r| r.address)
        .filter(|a| *a != own)
        .collect();
    if ledger.iot(&own).is_none() || others.len() + 1 < size {
        return Err(ProtocolError::NotEnoughIots {
            needed: size,
            available: ledger.iot_count(),
        });
    }
    let mut ring: Vec<Address> = others.choose_multiple(rng, size - 1).copied().collect();
    ring.push(own);
    ring.shuffle(rng);
    Ok(ring)
}

fn ring_keys(ledger: &Ledger, members: &[Address]) -> Result<Vec<PublicKey>, ProtocolError> {
    members
        .iter()
        .map(|a| {
            ledger
                .iot(a)
                .and_then(|r| r.public_key)
                .ok_or(ProtocolError::RingMemberWithoutKey(*a))
        })
        .collect()
}

/// Runs one audit of `fog` with `package` and reports the verdict.
///
/// A fog that rejects or ignores the audit request fails it: from the
/// oracle's side that is a refusal to serve a paying, registered device.
#[allow(clippy::too_many_arguments)]
pub fn service_audit<R: RngCore + CryptoRng>(
    oracle: &OracleAgent,
    fog: &mut FogAgent,
    ledger: &mut Ledger,
    link: &mut Link,
    ring_members: &[Address],
    package: &[u8],
    payment: Amount,
    rng: &mut R,
) -> Result<AuditReport, ProtocolError> {
    let own = oracle.iot().address();
    if !ledger.is_oracle(&oracle.address()) {
        return Err(ProtocolError::InvalidOracle("oracle identity not registered".into()));
    }
    if ledger.iot(&own).is_none() {
        return Err(ProtocolError::InvalidOracle("IoT identity not registered".into()));
    }
    let signer = ring_members
        .iter()
        .position(|a| *a == own)
        .ok_or_else(|| ProtocolError::InvalidOracle("ring must contain own IoT identity".into()))?;
    let ring = ring_keys(ledger, ring_members)?;

    let session = mutual_authenticate(oracle.iot(), fog, ledger, link, rng)?;
    let exchange = service_exchange(&session, oracle.iot(), fog, package, payment, ledger, link, rng)?;
    let expected = oracle.expected(package);
    let outcome = match (exchange.status(), &exchange.result) {
        (ExchangeStatus::Paid, Some(tau)) if *tau == expected => AuditOutcome::Passed,
        _ => AuditOutcome::Failed,
    };

    let verdict = match outcome {
        AuditOutcome::Passed => Verdict::Passed,
        AuditOutcome::Failed => Verdict::Failed,
    };
    let audit_id = random_audit_id(rng);
    let statement = audit_statement(verdict, &session.fog_address, &audit_id);
    let proof = AuditProof {
        audit_id,
        ring: ring_sign(&statement, &ring, signer, oracle.iot().keys().secret(), rng)?,
    };
    let call = match verdict {
        Verdict::Passed => Call::FogReward {
            fog: session.fog_address,
            proof: proof.clone(),
        },
        Verdict::Failed => Call::FogPenalize {
            fog: session.fog_address,
            proof: proof.clone(),
        },
    };
    let receipt = ledger
        .submit(&call.sign(oracle.keys().secret())?)
        .map_err(ProtocolError::Ledger)?;
    Ok(AuditReport {
        outcome,
        exchange,
        proof,
        receipt,
    })
}
