//! Fog misbehaviour model.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::crypto;

/// How a fog reacts to learning it was penalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdaptRule {
    /// `m ← m · u`, `u ~ U(0, 1)`.
    Multiplicative,
    /// `m ← m − u`, `u ~ U(0, m)`; same law as the multiplicative rule,
    /// kept as an explicit variant.
    Subtractive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FogBehavior {
    malicious_rate: f64,
    pub adaptive: bool,
}

impl FogBehavior {
    pub fn new(malicious_rate: f64, adaptive: bool) -> Self {
        assert!(
            (0.0..=1.0).contains(&malicious_rate),
            "malicious rate {malicious_rate} outside [0, 1]"
        );
        Self {
            malicious_rate,
            adaptive,
        }
    }

    pub fn malicious_rate(&self) -> f64 {
        self.malicious_rate
    }

    /// One Bernoulli draw: does the next response come back corrupted?
    pub fn draw_faulty<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        rng.gen_bool(self.malicious_rate)
    }
}

/// The computation audited in simulations: a Keccak digest of the package.
pub fn reference_service(package: &[u8]) -> Vec<u8> {
    crypto::hash(package).to_vec()
}

/// A fog's answer to `package`: the correct result, or with probability
/// `m_f` the correct result with its first byte perturbed.
pub fn fog_respond<R: Rng + ?Sized>(behavior: &FogBehavior, package: &[u8], rng: &mut R) -> Vec<u8> {
    let mut result = reference_service(package);
    if behavior.draw_faulty(rng) {
        result[0] ^= 0x01;
    }
    result
}

/// Lowers an adaptive fog's malicious rate by a random fraction. No-op for
/// non-adaptive fogs.
pub fn adapt_on_penalty<R: Rng + ?Sized>(behavior: &mut FogBehavior, rule: AdaptRule, rng: &mut R) {
    if !behavior.adaptive {
        return;
    }
    let u: f64 = rng.gen();
    let m = behavior.malicious_rate;
    behavior.malicious_rate = match rule {
        AdaptRule::Multiplicative => m * u,
        AdaptRule::Subtractive => (m - u * m).max(0.0),
    };
}
