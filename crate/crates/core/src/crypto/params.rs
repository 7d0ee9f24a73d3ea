//! Fixed curve and hash constants.
//!
//! The curve is secp256k1, `y^2 = x^3 + 7` over `F_p`. The single 256-bit
//! hash used everywhere (addresses, session keys, ECDSA prehash, ring
//! chaining) is Keccak-256. Points are hashed in their 64-byte
//! big-endian `x || y` encoding.

use k256::elliptic_curve::sec1::ToEncodedPoint;
use k256::AffinePoint;

pub const HASH_NAME: &str = "keccak-256";

/// Field modulus `p`.
pub const FIELD_PRIME_HEX: &str =
    "fffffffffffffffffffffffffffffffffffffffffffffffffffffffefffffc2f";
/// Order of the base point.
pub const GROUP_ORDER_HEX: &str =
    "fffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364141";
pub const BASE_X_HEX: &str = "79be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798";
pub const BASE_Y_HEX: &str = "483ada7726a3c4655da4fbfc0e1108a8fd17b448a68554199c47d08ffb10d4b8";

pub const COEFF_A: u64 = 0;
pub const COEFF_B: u64 = 7;

pub const POINT_ENCODING_LEN: usize = 64;
pub const ADDRESS_LEN: usize = 20;

/// Curve parameters as big-endian byte strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveParams {
    pub prime_p: [u8; 32],
    pub base_point: [u8; 64],
    pub order: [u8; 32],
    pub a: u64,
    pub b: u64,
}

impl CurveParams {
    pub fn secp256k1() -> Self {
        let mut base_point = [0u8; 64];
        base_point[..32].copy_from_slice(&from_hex32(BASE_X_HEX));
        base_point[32..].copy_from_slice(&from_hex32(BASE_Y_HEX));
        Self {
            prime_p: from_hex32(FIELD_PRIME_HEX),
            base_point,
            order: from_hex32(GROUP_ORDER_HEX),
            a: COEFF_A,
            b: COEFF_B,
        }
    }

    /// Base point as the backend sees it, encoded the same way as `base_point`.
    pub fn backend_generator_bytes() -> [u8; 64] {
        let enc = AffinePoint::GENERATOR.to_encoded_point(false);
        let mut out = [0u8; 64];
        out.copy_from_slice(&enc.as_bytes()[1..]);
        out
    }
}

fn from_hex32(s: &str) -> [u8; 32] {
    let v = hex::decode(s).expect("constant hex");
    v.try_into().expect("constant length")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_match_backend_generator() {
        let params = CurveParams::secp256k1();
        assert_eq!(params.base_point, CurveParams::backend_generator_bytes());
        assert_eq!((params.a, params.b), (0, 7));
    }
}
