use k256::ecdsa::{RecoveryId, Signature as EcdsaSignature, SigningKey, VerifyingKey};
use k256::elliptic_curve::ff::PrimeField;
use k256::{FieldBytes, Scalar};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::keys::{hash, PublicKey, SecretKey};
use super::{decode_hex_fixed, CryptoError};

/// Recoverable ECDSA signature. The hint selects which of the candidate
/// points for `r` is the signer's key, so recovery never has to guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub r: [u8; 32],
    pub s: [u8; 32],
    pub recovery_hint: u8,
}

impl Signature {
    pub const LEN: usize = 65;

    pub fn to_bytes(&self) -> [u8; Self::LEN] {
        let mut out = [0u8; Self::LEN];
        out[..32].copy_from_slice(&self.r);
        out[32..64].copy_from_slice(&self.s);
        out[64] = self.recovery_hint;
        out
    }

    pub fn from_bytes(bytes: &[u8; Self::LEN]) -> Self {
        let mut r = [0u8; 32];
        let mut s = [0u8; 32];
        r.copy_from_slice(&bytes[..32]);
        s.copy_from_slice(&bytes[32..64]);
        Self {
            r,
            s,
            recovery_hint: bytes[64],
        }
    }

    pub fn to_hex(&self) -> String {
        format!("0x{}", hex::encode(self.to_bytes()))
    }

    pub fn from_hex(s: &str) -> Result<Self, CryptoError> {
        Ok(Self::from_bytes(&decode_hex_fixed::<{ Self::LEN }>(s)?))
    }

    fn to_backend(self) -> Result<(EcdsaSignature, RecoveryId), CryptoError> {
        let r = nonzero_scalar(&self.r)?;
        let s = nonzero_scalar(&self.s)?;
        let sig = EcdsaSignature::from_scalars(r.to_repr(), s.to_repr())
            .map_err(|_| CryptoError::InvalidSignature)?;
        let recid = RecoveryId::from_byte(self.recovery_hint).ok_or(CryptoError::InvalidSignature)?;
        Ok((sig, recid))
    }
}

fn nonzero_scalar(bytes: &[u8; 32]) -> Result<Scalar, CryptoError> {
    let s: Option<Scalar> = Scalar::from_repr(FieldBytes::from(*bytes)).into();
    match s {
        Some(s) if !bool::from(s.is_zero()) => Ok(s),
        _ => Err(CryptoError::InvalidSignature),
    }
}

impl Serialize for Signature {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Signs `hash(message)` with RFC 6979 nonces.
pub fn sign(message: &[u8], secret: &SecretKey) -> Result<Signature, CryptoError> {
    if message.is_empty() {
        return Err(CryptoError::EmptyMessage);
    }
    let key = SigningKey::from(secret.non_zero());
    let (sig, recid) = key
        .sign_prehash_recoverable(&hash(message))
        .map_err(|_| CryptoError::InvalidSignature)?;
    let (r, s) = sig.split_bytes();
    Ok(Signature {
        r: r.into(),
        s: s.into(),
        recovery_hint: recid.to_byte(),
    })
}

/// Recovers the signer's public key.
///
/// A signature produced over a different message generally recovers to an
/// unrelated key rather than failing; callers compare addresses.
pub fn recover(message: &[u8], sig: &Signature) -> Result<PublicKey, CryptoError> {
    if message.is_empty() {
        return Err(CryptoError::EmptyMessage);
    }
    let (sig, recid) = sig.to_backend()?;
    let key = VerifyingKey::recover_from_prehash(&hash(message), &sig, recid)
        .map_err(|_| CryptoError::RecoveryFailed)?;
    PublicKey::from_affine(*key.as_affine()).map_err(|_| CryptoError::RecoveryFailed)
}
