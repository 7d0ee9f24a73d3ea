//! Elliptic-curve primitives over secp256k1.
//!
//! Everything identity-related in the system bottoms out here: key pairs,
//! 20-byte addresses, recoverable ECDSA signatures (so a ledger call only
//! needs to carry a signature, never a public key), Diffie-Hellman session
//! keys, authenticated payload encryption and the ring signature an oracle
//! uses to prove it owns *some* registered IoT identity without saying which.
//!
//! All functions are pure or take a caller-supplied RNG, so a seeded
//! `ChaCha` generator makes every run reproducible.

mod ecdh;
mod ecdsa;
mod keys;
pub mod params;
mod ring;
mod symmetric;

pub use ecdh::shared_secret;
pub use ecdsa::{recover, sign, Signature};
pub use keys::{
    address_of, derive_public, hash, hash_parts, Address, KeyPair, PublicKey, SecretKey,
};
pub use params::CurveParams;
pub use ring::{ring_sign, ring_verify, RingSignature};
pub use symmetric::{symmetric_decrypt, symmetric_encrypt, SymmetricKey};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("scalar is zero or not below the group order")]
    InvalidScalar,
    #[error("not a valid curve point")]
    InvalidPoint,
    #[error("signature component out of range")]
    InvalidSignature,
    #[error("no public key can be recovered from signature")]
    RecoveryFailed,
    #[error("message must not be empty")]
    EmptyMessage,
    #[error("ciphertext failed authentication")]
    DecryptionFailed,
    #[error("ring must contain at least two members, got {0}")]
    RingTooSmall(usize),
    #[error("signer index {index} out of range for ring of {len}")]
    SignerIndexOutOfRange { index: usize, len: usize },
    #[error("ring member at signer index does not match the signing key")]
    SignerMismatch,
    #[error("ring members must be distinct")]
    DuplicateRingMember,
    #[error("malformed ring signature: {0}")]
    MalformedRingSignature(String),
    #[error("malformed hex: {0}")]
    Hex(String),
}

pub(crate) fn decode_hex_fixed<const N: usize>(s: &str) -> Result<[u8; N], CryptoError> {
    let raw = s.strip_prefix("0x").unwrap_or(s);
    let bytes = hex::decode(raw).map_err(|e| CryptoError::Hex(e.to_string()))?;
    bytes
        .try_into()
        .map_err(|v: Vec<u8>| CryptoError::Hex(format!("expected {N} bytes, got {}", v.len())))
}
