use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use k256::elliptic_curve::ff::PrimeField;
use k256::elliptic_curve::group::prime::PrimeCurveAffine;
use k256::elliptic_curve::sec1::{FromEncodedPoint, ToEncodedPoint};
use k256::elliptic_curve::Field;
use k256::{AffinePoint, EncodedPoint, FieldBytes, NonZeroScalar, ProjectivePoint, Scalar};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha3::{Digest, Keccak256};

use super::params::{ADDRESS_LEN, POINT_ENCODING_LEN};
use super::{decode_hex_fixed, CryptoError};

pub fn hash(data: &[u8]) -> [u8; 32] {
    Keccak256::digest(data).into()
}

pub fn hash_parts(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Keccak256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().into()
}

/// A secret scalar in `[1, order - 1]`.
#[derive(Clone, Copy)]
pub struct SecretKey(NonZeroScalar);

impl PartialEq for SecretKey {
    fn eq(&self, other: &Self) -> bool {
        self.to_be_bytes() == other.to_be_bytes()
    }
}

impl Eq for SecretKey {}

impl SecretKey {
    pub fn from_be_bytes(bytes: &[u8; 32]) -> Result<Self, CryptoError> {
        let scalar: Option<Scalar> = Scalar::from_repr(FieldBytes::from(*bytes)).into();
        let scalar = scalar.ok_or(CryptoError::InvalidScalar)?;
        let nz: Option<NonZeroScalar> = NonZeroScalar::new(scalar).into();
        nz.map(Self).ok_or(CryptoError::InvalidScalar)
    }

    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self(NonZeroScalar::random(rng))
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        self.0.to_repr().into()
    }

    pub fn to_hex(&self) -> String {
        format!("0x{}", hex::encode(self.to_be_bytes()))
    }

    pub fn from_hex(s: &str) -> Result<Self, CryptoError> {
        Self::from_be_bytes(&decode_hex_fixed::<32>(s)?)
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey((ProjectivePoint::GENERATOR * *self.0).to_affine())
    }

    pub(crate) fn scalar(&self) -> Scalar {
        *self.0
    }

    pub(crate) fn non_zero(&self) -> NonZeroScalar {
        self.0
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

/// A curve point other than the point at infinity.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PublicKey(AffinePoint);

impl PublicKey {
    pub fn from_affine(point: AffinePoint) -> Result<Self, CryptoError> {
        if bool::from(point.is_identity()) {
            return Err(CryptoError::InvalidPoint);
        }
        Ok(Self(point))
    }

    /// Parses the 64-byte big-endian `x || y` encoding; rejects off-curve points.
    pub fn from_bytes(bytes: &[u8; POINT_ENCODING_LEN]) -> Result<Self, CryptoError> {
        let encoded = EncodedPoint::from_untagged_bytes(bytes.into());
        let point: Option<AffinePoint> = AffinePoint::from_encoded_point(&encoded).into();
        point.ok_or(CryptoError::InvalidPoint).and_then(Self::from_affine)
    }

    pub fn to_bytes(&self) -> [u8; POINT_ENCODING_LEN] {
        let enc = self.0.to_encoded_point(false);
        let mut out = [0u8; POINT_ENCODING_LEN];
        out.copy_from_slice(&enc.as_bytes()[1..]);
        out
    }

    pub fn x_bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        out.copy_from_slice(&self.to_bytes()[..32]);
        out
    }

    pub fn to_hex(&self) -> String {
        format!("0x{}", hex::encode(self.to_bytes()))
    }

    pub fn from_hex(s: &str) -> Result<Self, CryptoError> {
        Self::from_bytes(&decode_hex_fixed::<POINT_ENCODING_LEN>(s)?)
    }

    pub fn address(&self) -> Address {
        address_of(self)
    }

    pub fn as_affine(&self) -> &AffinePoint {
        &self.0
    }

    pub(crate) fn projective(&self) -> ProjectivePoint {
        ProjectivePoint::from(self.0)
    }
}

impl Hash for PublicKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.to_bytes().hash(state);
    }
}

impl PartialOrd for PublicKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PublicKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.to_bytes().cmp(&other.to_bytes())
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", self.to_hex())
    }
}

impl fmt::Display for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for PublicKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for PublicKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// `secret · G`.
///
/// Takes the raw 32-byte big-endian scalar so out-of-range input is reported
/// rather than silently reduced.
pub fn derive_public(secret: &[u8; 32]) -> Result<PublicKey, CryptoError> {
    Ok(SecretKey::from_be_bytes(secret)?.public_key())
}

/// Last 20 bytes of the hash of the 64-byte point encoding.
pub fn address_of(public: &PublicKey) -> Address {
    let digest = hash(&public.to_bytes());
    let mut out = [0u8; ADDRESS_LEN];
    out.copy_from_slice(&digest[32 - ADDRESS_LEN..]);
    Address(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct KeyPair {
    secret: SecretKey,
    public: PublicKey,
}

impl KeyPair {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self::from_secret(SecretKey::random(rng))
    }

    pub fn from_secret(secret: SecretKey) -> Self {
        Self {
            public: secret.public_key(),
            secret,
        }
    }

    pub fn secret(&self) -> &SecretKey {
        &self.secret
    }

    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn address(&self) -> Address {
        address_of(&self.public)
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair")
            .field("address", &self.address())
            .finish_non_exhaustive()
    }
}

/// 20-byte account identifier. Displays as `0x` plus 40 lowercase hex digits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Address(pub [u8; ADDRESS_LEN]);

impl Address {
    pub fn as_bytes(&self) -> &[u8; ADDRESS_LEN] {
        &self.0
    }

    /// Deterministic placeholder identity, for harnesses that never sign.
    pub fn synthetic(tag: &str, index: u64) -> Self {
        let digest = hash_parts(&[tag.as_bytes(), &index.to_be_bytes()]);
        let mut out = [0u8; ADDRESS_LEN];
        out.copy_from_slice(&digest[32 - ADDRESS_LEN..]);
        Address(out)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Address({self})")
    }
}

impl FromStr for Address {
    type Err = CryptoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if !s.starts_with("0x") {
            return Err(CryptoError::Hex("address must be 0x-prefixed".into()));
        }
        decode_hex_fixed::<ADDRESS_LEN>(s).map(Address)
    }
}

impl Serialize for Address {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn random_nonzero_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
    loop {
        let s = Scalar::random(&mut *rng);
        if !bool::from(s.is_zero()) {
            return s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::params::GROUP_ORDER_HEX;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn be(v: u64) -> [u8; 32] {
        let mut out = [0u8; 32];
        out[24..].copy_from_slice(&v.to_be_bytes());
        out
    }

    #[test]
    fn unit_secret_gives_generator() {
        let p = derive_public(&be(1)).unwrap();
        assert_eq!(
            p.to_bytes(),
            crate::crypto::CurveParams::secp256k1().base_point
        );
    }

    #[test]
    fn out_of_range_scalars_rejected() {
        let order: [u8; 32] = hex::decode(GROUP_ORDER_HEX).unwrap().try_into().unwrap();
        assert_eq!(derive_public(&order), Err(CryptoError::InvalidScalar));
        assert_eq!(derive_public(&[0u8; 32]), Err(CryptoError::InvalidScalar));
        assert_eq!(derive_public(&[0xff; 32]), Err(CryptoError::InvalidScalar));
    }

    #[test]
    fn identity_is_not_a_public_key() {
        assert_eq!(
            PublicKey::from_affine(AffinePoint::IDENTITY),
            Err(CryptoError::InvalidPoint)
        );
    }

    #[test]
    fn off_curve_bytes_rejected() {
        let mut b = derive_public(&be(5)).unwrap().to_bytes();
        b[63] ^= 1;
        assert_eq!(PublicKey::from_bytes(&b), Err(CryptoError::InvalidPoint));
    }

    #[test]
    fn address_hex_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let kp = KeyPair::generate(&mut rng);
        let a = kp.address();
        let s = a.to_string();
        assert_eq!(s.len(), 42);
        assert_eq!(s.parse::<Address>().unwrap(), a);
        assert!("deadbeef".parse::<Address>().is_err());
    }

    #[test]
    fn address_is_deterministic() {
        let p = derive_public(&be(77)).unwrap();
        assert_eq!(address_of(&p), address_of(&p));
    }

    #[test]
    fn secret_hex_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let sk = SecretKey::random(&mut rng);
        assert_eq!(SecretKey::from_hex(&sk.to_hex()).unwrap(), sk);
    }
}
