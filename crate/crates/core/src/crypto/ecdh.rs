use super::keys::{hash, PublicKey, SecretKey};
use super::symmetric::SymmetricKey;

/// `hash(encode(k_A · P_B))`; equal to `shared_secret(k_B, P_A)`.
pub fn shared_secret(secret: &SecretKey, peer: &PublicKey) -> SymmetricKey {
    // k in [1, n-1] and P of prime order n, so the product is never the identity.
    let point = (peer.projective() * secret.scalar()).to_affine();
    let shared = PublicKey::from_affine(point).expect("nonzero scalar times non-identity point");
    SymmetricKey::from_bytes(hash(&shared.to_bytes()))
}
