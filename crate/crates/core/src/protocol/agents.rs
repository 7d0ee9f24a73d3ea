use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::ProtocolError;
use crate::crypto::{Address, KeyPair, SymmetricKey};
use crate::ledger::Reputation;

/// Ground-truth computation a fog node offers and an oracle can replay.
pub type ServiceFn = Arc<dyn Fn(&[u8]) -> Vec<u8> + Send + Sync>;

/// What a fog node does with one accepted request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FogResponse {
    Result(Vec<u8>),
    Reject,
    Silent,
}

/// Fault hook: sees the package and the honest result, decides the response.
pub type FogBehavior = Box<dyn FnMut(&[u8], Vec<u8>) -> FogResponse + Send>;

pub fn echo_service() -> ServiceFn {
    Arc::new(|g: &[u8]| g.to_vec())
}

#[derive(Debug, Clone)]
pub struct IotAgent {
    keys: KeyPair,
    reputation_threshold: Reputation,
}

impl IotAgent {
    pub fn new(keys: KeyPair, reputation_threshold: Reputation) -> Self {
        Self {
            keys,
            reputation_threshold,
        }
    }

    pub fn keys(&self) -> &KeyPair {
        &self.keys
    }

    pub fn address(&self) -> Address {
        self.keys.address()
    }

    pub fn reputation_threshold(&self) -> Reputation {
        self.reputation_threshold
    }
}

pub struct FogAgent {
    keys: KeyPair,
    service: ServiceFn,
    behavior: FogBehavior,
    sessions: HashMap<Address, SymmetricKey>,
}

impl FogAgent {
    /// An honest node running `service`.
    pub fn new(keys: KeyPair, service: ServiceFn) -> Self {
        Self {
            keys,
            service,
            behavior: Box::new(|_, honest| FogResponse::Result(honest)),
            sessions: HashMap::new(),
        }
    }

    pub fn with_behavior(mut self, behavior: FogBehavior) -> Self {
        self.behavior = behavior;
        self
    }

    pub fn set_behavior(&mut self, behavior: FogBehavior) {
        self.behavior = behavior;
    }

    pub fn keys(&self) -> &KeyPair {
        &self.keys
    }

    pub fn address(&self) -> Address {
        self.keys.address()
    }

    /// Fog-side key for an authenticated peer.
    pub fn session_key(&self, peer: &Address) -> Option<SymmetricKey> {
        self.sessions.get(peer).copied()
    }

    pub(crate) fn store_session(&mut self, peer: Address, key: SymmetricKey) {
        self.sessions.insert(peer, key);
    }

    pub(crate) fn respond(&mut self, package: &[u8]) -> FogResponse {
        let honest = (self.service)(package);
        (self.behavior)(package, honest)
    }
}

impl fmt::Debug for FogAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FogAgent")
            .field("address", &self.address())
            .field("sessions", &self.sessions.len())
            .finish_non_exhaustive()
    }
}

/// An oracle with an IoT-facing identity (used toward fog nodes) and a
/// contract-facing identity (used to report verdicts).
pub struct OracleAgent {
    iot: IotAgent,
    keys: KeyPair,
    ring_size: usize,
    reference: ServiceFn,
}

impl OracleAgent {
    pub fn new(
        iot_keys: KeyPair,
        oracle_keys: KeyPair,
        ring_size: usize,
        reference: ServiceFn,
    ) -> Result<Self, ProtocolError> {
        if iot_keys.address() == oracle_keys.address() {
            return Err(ProtocolError::InvalidOracle(
                "IoT and oracle identities must differ".into(),
            ));
        }
        if ring_size < 2 {
            return Err(ProtocolError::InvalidOracle(format!(
                "ring size {ring_size} below 2"
            )));
        }
        Ok(Self {
            // The oracle audits whatever it is told to; it never refuses a
            // fog on reputation grounds.
            iot: IotAgent::new(iot_keys, Reputation::MIN),
            keys: oracle_keys,
            ring_size,
            reference,
        })
    }

    pub fn iot(&self) -> &IotAgent {
        &self.iot
    }

    pub fn keys(&self) -> &KeyPair {
        &self.keys
    }

    pub fn address(&self) -> Address {
        self.keys.address()
    }

    pub fn ring_size(&self) -> usize {
        self.ring_size
    }

    pub fn expected(&self, package: &[u8]) -> Vec<u8> {
        (self.reference)(package)
    }
}

impl fmt::Debug for OracleAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleAgent")
            .field("iot_address", &self.iot.address())
            .field("oracle_address", &self.address())
            .field("ring_size", &self.ring_size)
            .finish_non_exhaustive()
    }
}
