//! Mutual authentication.
//!
//! 1. IoT sends `AUTH1 = nonce_i || sig_i(nonce_i)`.
//! 2. Fog recovers the IoT key from `sig_i` and looks its address up in the
//!    IoT table.
//! 3. Unknown address: authentication fails, the fog sends nothing.
//! 4. Fog sends `AUTH2 = nonce_f || sig_f(nonce_i || nonce_f)`.
//! 5. IoT recovers the fog key, looks it up in the fog table and checks the
//!    recorded reputation against its own threshold.
//! 6. Either check fails: authentication fails.
//! 7. Both sides derive the same Diffie-Hellman key.
//!
//! Only reads the ledger, so no failure path can change its state.

use rand::{CryptoRng, RngCore};
use thiserror::Error;

use super::agents::{FogAgent, IotAgent};
use super::frame::{Frame, FrameKind};
use super::link::{Direction, Link};
use crate::crypto::{self, Address, PublicKey, Signature, SymmetricKey};
use crate::ledger::{Ledger, Reputation};

const AUTH1_DOMAIN: &[u8] = b"fogaudit/auth1/v1";
const AUTH2_DOMAIN: &[u8] = b"fogaudit/auth2/v1";
const NONCE_LEN: usize = 32;
const HELLO_LEN: usize = NONCE_LEN + Signature::LEN;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuthFailure {
    #[error("IoT device not registered")]
    IoTNotRegistered,
    #[error("fog node not registered")]
    FogNotRegistered,
    #[error("fog reputation {reputation} below threshold {threshold}")]
    ReputationBelowThreshold {
        reputation: Reputation,
        threshold: Reputation,
    },
    #[error("signature does not recover a public key")]
    BadSignature,
    #[error("peer did not answer in time")]
    Timeout,
    #[error("malformed handshake frame")]
    Malformed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Session {
    pub iot_address: Address,
    pub fog_address: Address,
    /// IoT-side key; the fog keeps its own copy.
    pub symmetric_key: SymmetricKey,
}

fn split_hello(frame: &Frame, kind: FrameKind) -> Result<([u8; NONCE_LEN], Signature), AuthFailure> {
    if frame.kind != kind || frame.payload.len() != HELLO_LEN {
        return Err(AuthFailure::Malformed);
    }
    let nonce: [u8; NONCE_LEN] = frame.payload[..NONCE_LEN].try_into().expect("sized");
    let sig: [u8; Signature::LEN] = frame.payload[NONCE_LEN..].try_into().expect("sized");
    Ok((nonce, Signature::from_bytes(&sig)))
}

fn hello(nonce: &[u8; NONCE_LEN], sig: &Signature, kind: FrameKind) -> Frame {
    let mut payload = nonce.to_vec();
    payload.extend_from_slice(&sig.to_bytes());
    Frame::new(kind, payload)
}

fn recover(message: &[u8], sig: &Signature) -> Result<PublicKey, AuthFailure> {
    crypto::recover(message, sig).map_err(|_| AuthFailure::BadSignature)
}

pub fn mutual_authenticate<R: RngCore + CryptoRng>(
    iot: &IotAgent,
    fog: &mut FogAgent,
    ledger: &Ledger,
    link: &mut Link,
    rng: &mut R,
) -> Result<Session, AuthFailure> {
    // Step 1.
    let mut nonce_i = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce_i);
    let msg_i = [AUTH1_DOMAIN, &nonce_i].concat();
    let sig_i = crypto::sign(&msg_i, iot.keys().secret()).expect("message is non-empty");
    link.step(1, format!("IoT {} sends signed nonce", iot.address()));
    let frame = link
        .transmit(Direction::IotToFog, hello(&nonce_i, &sig_i, FrameKind::Auth1))
        .ok_or(AuthFailure::Timeout)?;

    // Steps 2-3, fog side.
    let (nonce_i_seen, sig_i_seen) = split_hello(&frame, FrameKind::Auth1)?;
    let iot_key = recover(&[AUTH1_DOMAIN, &nonce_i_seen].concat(), &sig_i_seen)?;
    let iot_address = iot_key.address();
    link.step(2, format!("fog recovers IoT key, address {iot_address}"));
    if ledger.iot(&iot_address).is_none() {
        link.step(3, "IoT address not in IoT table: authentication fails");
        return Err(AuthFailure::IoTNotRegistered);
    }
    link.step(3, "IoT address found in IoT table");

    // Step 4.
    let mut nonce_f = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce_f);
    let msg_f = [AUTH2_DOMAIN, &nonce_i_seen, &nonce_f].concat();
    let sig_f = crypto::sign(&msg_f, fog.keys().secret()).expect("message is non-empty");
    fog.store_session(iot_address, crypto::shared_secret(fog.keys().secret(), &iot_key));
    link.step(4, format!("fog {} sends signed nonce", fog.address()));
    let frame = link
        .transmit(Direction::FogToIot, hello(&nonce_f, &sig_f, FrameKind::Auth2))
        .ok_or(AuthFailure::Timeout)?;

    // Steps 5-6, IoT side.
    let (nonce_f_seen, sig_f_seen) = split_hello(&frame, FrameKind::Auth2)?;
    let fog_key = recover(&[AUTH2_DOMAIN, &nonce_i, &nonce_f_seen].concat(), &sig_f_seen)?;
    let fog_address = fog_key.address();
    link.step(5, format!("IoT recovers fog key, address {fog_address}"));
    let Some(record) = ledger.fog(&fog_address) else {
        link.step(6, "fog address not in fog table: authentication fails");
        return Err(AuthFailure::FogNotRegistered);
    };
    if record.reputation < iot.reputation_threshold() {
        link.step(
            6,
            format!(
                "fog reputation {} below threshold {}: authentication fails",
                record.reputation,
                iot.reputation_threshold()
            ),
        );
        return Err(AuthFailure::ReputationBelowThreshold {
            reputation: record.reputation,
            threshold: iot.reputation_threshold(),
        });
    }
    link.step(
        6,
        format!(
            "fog found with reputation {} >= threshold {}",
            record.reputation,
            iot.reputation_threshold()
        ),
    );

    // Step 7.
    let symmetric_key = crypto::shared_secret(iot.keys().secret(), &fog_key);
    link.step(7, "both sides hold the shared session key");
    Ok(Session {
        iot_address: iot.address(),
        fog_address,
        symmetric_key,
    })
}
