//! Ledger-mediated mutual authentication, service payment and integrity
//! auditing between IoT devices and fog nodes.
//!
//! * [`crypto`]: secp256k1 keys, recoverable signatures, session keys and the
//!   ring signature used as a proof of IoT-table membership.
//! * [`ledger`]: in-process emulation of the identity and integrity contract.
//! * [`protocol`]: IoT, fog and oracle agents exchanging framed messages.
//! * [`scheduling`]: audit cadence and cluster sampling policies.
//! * [`simulation`]: Monte-Carlo audit-cost and system-state scenarios.

pub mod crypto;
pub mod ledger;
pub mod protocol;
pub mod scheduling;
pub mod simulation;

pub use crypto::{Address, KeyPair, PublicKey, RingSignature, SecretKey, Signature};
