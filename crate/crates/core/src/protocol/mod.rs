//! IoT, fog and oracle agents talking over framed messages.
//!
//! * [`mutual_authenticate`]: signature exchange checked against the ledger
//!   tables, ending in a Diffie-Hellman session key on both sides.
//! * [`service_exchange`]: an encrypted request/result round followed by the
//!   IoT device's payment call.
//! * [`service_audit`]: an oracle posing as an IoT device, comparing the
//!   fog's answer with a known result and reporting the verdict behind a
//!   ring signature.
//!
//! Agents are plain state; the flows drive both ends over a [`Link`] and
//! read or write the [`Ledger`](crate::ledger::Ledger) directly.

mod agents;
mod audit;
mod auth;
mod frame;
mod link;
mod service;

pub use agents::{
    echo_service, FogAgent, FogBehavior, FogResponse, IotAgent, OracleAgent, ServiceFn,
};
pub use audit::{select_ring_members, service_audit, AuditOutcome, AuditReport, DEFAULT_RING_SIZE};
pub use auth::{mutual_authenticate, AuthFailure, Session};
pub use frame::{Frame, FrameKind, FRAME_HEADER_LEN};
pub use link::{
    Direction, Fault, FaultAction, FrameRecord, Link, LinkConfig, StepRecord, Transcript,
    DEFAULT_TIMEOUT_TICKS,
};
pub use service::{service_exchange, ExchangeStatus, ServiceExchange};

use thiserror::Error;

use crate::crypto::{Address, CryptoError};
use crate::ledger::LedgerError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("authentication failed: {0}")]
    Auth(#[from] AuthFailure),
    #[error("malformed frame: {0}")]
    MalformedFrame(&'static str),
    #[error("unexpected {0:?} frame")]
    UnexpectedFrame(FrameKind),
    #[error("no session with {0}")]
    NoSession(Address),
    #[error("channel payload failed authentication")]
    DecryptionFailed,
    #[error("payment rejected by ledger: {0}")]
    PaymentFailed(LedgerError),
    #[error("exchange cannot move from {from:?} to {to:?}")]
    InvalidTransition {
        from: ExchangeStatus,
        to: ExchangeStatus,
    },
    #[error("oracle misconfigured: {0}")]
    InvalidOracle(String),
    #[error("ring member {0} has no registered public key")]
    RingMemberWithoutKey(Address),
    #[error("ring of {needed} needs more registered IoT devices than the {available} present")]
    NotEnoughIots { needed: usize, available: usize },
    #[error("ledger: {0}")]
    Ledger(LedgerError),
    #[error("crypto: {0}")]
    Crypto(#[from] CryptoError),
}
