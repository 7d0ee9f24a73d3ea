//! Ring signature proving membership in a set of public keys.
//!
//! Signing with key `k_j` at position `j` of ring `P_1..P_n`:
//!
//! 1. draw `q`, set `T_j = q·G`;
//! 2. draw `σ_i` for every `i ≠ j`;
//! 3. for `i = j+1, …, n, 1, …, j-1`: `c_i = H(m | x_{i-1})`,
//!    `T_i = σ_i·G + c_i·P_i`;
//! 4. `c_j = H(m | x_{j-1})` and `σ_j = q − c_j·k_j (mod order)`.
//!
//! The signature is `(c_1, σ, P)`. A verifier starts at `c_1`, walks the
//! ring recomputing every `T_i` and accepts iff the chain returns to `c_1`.
//! `x_i` is the 32-byte big-endian x-coordinate of `T_i`, `|` is byte
//! concatenation and `H` is reduced modulo the group order. Indices wrap, so
//! `x_0` is `x_n`.

use std::collections::BTreeSet;

use k256::elliptic_curve::ff::PrimeField;
use k256::elliptic_curve::ops::{LinearCombination, Reduce};
use k256::elliptic_curve::sec1::ToEncodedPoint;
use k256::{FieldBytes, ProjectivePoint, Scalar, U256};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::keys::{hash_parts, random_nonzero_scalar, PublicKey, SecretKey};
use super::{decode_hex_fixed, CryptoError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingSignature {
    c1: Scalar,
    sigma: Vec<Scalar>,
    ring: Vec<PublicKey>,
}

impl RingSignature {
    /// Builds a signature from raw parts, checking structure only.
    pub fn from_parts(
        c1: [u8; 32],
        sigma: Vec<[u8; 32]>,
        ring: Vec<PublicKey>,
    ) -> Result<Self, CryptoError> {
        let c1 = scalar_from_bytes(&c1)?;
        let sigma = sigma
            .iter()
            .map(scalar_from_bytes)
            .collect::<Result<Vec<_>, _>>()?;
        let rs = Self { c1, sigma, ring };
        rs.check_structure()?;
        Ok(rs)
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn ring(&self) -> &[PublicKey] {
        &self.ring
    }

    pub fn c1_bytes(&self) -> [u8; 32] {
        self.c1.to_repr().into()
    }

    pub fn sigma_bytes(&self) -> Vec<[u8; 32]> {
        self.sigma.iter().map(|s| s.to_repr().into()).collect()
    }

    /// Canonical byte form, used when a ledger call commits to a proof.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.ring.len();
        let mut out = Vec::with_capacity(4 + 32 + n * (32 + 64));
        out.extend_from_slice(&(n as u32).to_be_bytes());
        out.extend_from_slice(&self.c1_bytes());
        for s in self.sigma_bytes() {
            out.extend_from_slice(&s);
        }
        for p in &self.ring {
            out.extend_from_slice(&p.to_bytes());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RingSignatureText::from(self)).expect("plain strings")
    }

    pub fn from_json(text: &str) -> Result<Self, CryptoError> {
        let raw: RingSignatureText = serde_json::from_str(text)
            .map_err(|e| CryptoError::MalformedRingSignature(e.to_string()))?;
        raw.try_into()
    }

    fn check_structure(&self) -> Result<(), CryptoError> {
        let n = self.ring.len();
        if n < 2 {
            return Err(CryptoError::MalformedRingSignature(format!(
                "ring of {n} members"
            )));
        }
        if self.sigma.len() != n {
            return Err(CryptoError::MalformedRingSignature(format!(
                "{} responses for {n} members",
                self.sigma.len()
            )));
        }
        if !all_distinct(&self.ring) {
            return Err(CryptoError::MalformedRingSignature(
                "duplicate ring member".into(),
            ));
        }
        Ok(())
    }
}

/// Hex text form: `{"c1": "0x..", "sigma": ["0x..", ..], "ring": ["0x<x||y>", ..]}`.
#[derive(Serialize, Deserialize)]
struct RingSignatureText {
    c1: String,
    sigma: Vec<String>,
    ring: Vec<String>,
}

impl From<&RingSignature> for RingSignatureText {
    fn from(rs: &RingSignature) -> Self {
        Self {
            c1: format!("0x{}", hex::encode(rs.c1_bytes())),
            sigma: rs
                .sigma_bytes()
                .iter()
                .map(|s| format!("0x{}", hex::encode(s)))
                .collect(),
            ring: rs.ring.iter().map(PublicKey::to_hex).collect(),
        }
    }
}

impl TryFrom<RingSignatureText> for RingSignature {
    type Error = CryptoError;

    fn try_from(raw: RingSignatureText) -> Result<Self, CryptoError> {
        let malformed = |e: CryptoError| CryptoError::MalformedRingSignature(e.to_string());
        let c1 = decode_hex_fixed::<32>(&raw.c1).map_err(malformed)?;
        let sigma = raw
            .sigma
            .iter()
            .map(|s| decode_hex_fixed::<32>(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(malformed)?;
        let ring = raw
            .ring
            .iter()
            .map(|p| PublicKey::from_hex(p))
            .collect::<Result<Vec<_>, _>>()
            .map_err(malformed)?;
        RingSignature::from_parts(c1, sigma, ring)
    }
}

impl Serialize for RingSignature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RingSignatureText::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RingSignature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        RingSignatureText::deserialize(d)?
            .try_into()
            .map_err(serde::de::Error::custom)
    }
}

fn scalar_from_bytes(bytes: &[u8; 32]) -> Result<Scalar, CryptoError> {
    Option::<Scalar>::from(Scalar::from_repr(FieldBytes::from(*bytes))).ok_or_else(|| {
        CryptoError::MalformedRingSignature("scalar not below group order".into())
    })
}

fn all_distinct(ring: &[PublicKey]) -> bool {
    let mut seen = BTreeSet::new();
    ring.iter().all(|p| seen.insert(p.to_bytes()))
}

fn x_coordinate(point: &ProjectivePoint) -> [u8; 32] {
    let enc = point.to_affine().to_encoded_point(false);
    let mut out = [0u8; 32];
    // the identity has no coordinates; both sides agree on zeros
    if let Some(x) = enc.x() {
        out.copy_from_slice(x);
    }
    out
}

fn chain_challenge(message: &[u8], x_prev: &[u8; 32]) -> Scalar {
    let digest = hash_parts(&[message, x_prev]);
    <Scalar as Reduce<U256>>::reduce_bytes(&FieldBytes::from(digest))
}

fn commitment(sigma: &Scalar, c: &Scalar, member: &PublicKey) -> ProjectivePoint {
    ProjectivePoint::lincomb(&ProjectivePoint::GENERATOR, sigma, &member.projective(), c)
}

pub fn ring_sign<R: RngCore + CryptoRng>(
    message: &[u8],
    ring: &[PublicKey],
    signer_index: usize,
    secret: &SecretKey,
    rng: &mut R,
) -> Result<RingSignature, CryptoError> {
    let n = ring.len();
    if n < 2 {
        return Err(CryptoError::RingTooSmall(n));
    }
    if signer_index >= n {
        return Err(CryptoError::SignerIndexOutOfRange {
            index: signer_index,
            len: n,
        });
    }
    if ring[signer_index] != secret.public_key() {
        return Err(CryptoError::SignerMismatch);
    }
    if !all_distinct(ring) {
        return Err(CryptoError::DuplicateRingMember);
    }

    let j = signer_index;
    let q = random_nonzero_scalar(rng);
    let mut sigma = vec![Scalar::ZERO; n];
    for (i, s) in sigma.iter_mut().enumerate() {
        if i != j {
            *s = random_nonzero_scalar(rng);
        }
    }

    let mut xs = vec![[0u8; 32]; n];
    let mut cs = vec![Scalar::ZERO; n];
    xs[j] = x_coordinate(&(ProjectivePoint::GENERATOR * q));
    for step in 1..n {
        let i = (j + step) % n;
        let prev = (i + n - 1) % n;
        cs[i] = chain_challenge(message, &xs[prev]);
        xs[i] = x_coordinate(&commitment(&sigma[i], &cs[i], &ring[i]));
    }
    cs[j] = chain_challenge(message, &xs[(j + n - 1) % n]);
    sigma[j] = q - cs[j] * secret.scalar();

    Ok(RingSignature {
        c1: cs[0],
        sigma,
        ring: ring.to_vec(),
    })
}

/// `Ok(false)` on any chain mismatch; `Err` only for structurally broken input.
pub fn ring_verify(message: &[u8], rs: &RingSignature) -> Result<bool, CryptoError> {
    rs.check_structure()?;
    let mut c = rs.c1;
    for (sigma, member) in rs.sigma.iter().zip(&rs.ring) {
        let x = x_coordinate(&commitment(sigma, &c, member));
        c = chain_challenge(message, &x);
    }
    Ok(c == rs.c1)
}
