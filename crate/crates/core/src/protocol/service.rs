//! Encrypted service request, result delivery and payment.
//!
//! The IoT device signs the payment call it will later submit, binding the
//! amount, the fog address and a digest of the package. That signature rides
//! inside the encrypted request so the fog can check the offer before doing
//! any work.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::agents::{FogAgent, FogResponse, IotAgent};
use super::auth::Session;
use super::frame::{Frame, FrameKind};
use super::link::{Direction, Link};
use super::ProtocolError;
use crate::crypto::{self, symmetric_decrypt, symmetric_encrypt, Signature};
use crate::ledger::{Amount, Call, Ledger, Transaction};

const REQUEST_HEADER_LEN: usize = 8 + Signature::LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExchangeStatus {
    Proposed,
    Rejected,
    TimedOut,
    Completed,
    Paid,
}

impl ExchangeStatus {
    pub fn can_become(self, next: ExchangeStatus) -> bool {
        use ExchangeStatus::*;
        matches!(
            (self, next),
            (Proposed, Rejected) | (Proposed, TimedOut) | (Proposed, Completed) | (Completed, Paid)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceExchange {
    pub package: Vec<u8>,
    pub payment: Amount,
    pub result: Option<Vec<u8>>,
    status: ExchangeStatus,
}

impl ServiceExchange {
    fn new(package: &[u8], payment: Amount) -> Self {
        Self {
            package: package.to_vec(),
            payment,
            result: None,
            status: ExchangeStatus::Proposed,
        }
    }

    pub fn status(&self) -> ExchangeStatus {
        self.status
    }

    fn advance(&mut self, next: ExchangeStatus) -> Result<(), ProtocolError> {
        if !self.status.can_become(next) {
            return Err(ProtocolError::InvalidTransition {
                from: self.status,
                to: next,
            });
        }
        self.status = next;
        Ok(())
    }
}

fn payment_call(session: &Session, payment: Amount, package: &[u8]) -> Call {
    Call::IotFogPayment {
        fog: session.fog_address,
        amount: payment,
        request_digest: crypto::hash(package),
    }
}

/// Fog side of one request: decrypt, check the signed offer, run the service.
fn serve<R: RngCore + CryptoRng>(
    fog: &mut FogAgent,
    session: &Session,
    ledger: &Ledger,
    frame: &Frame,
    rng: &mut R,
) -> Result<Option<Frame>, ProtocolError> {
    if frame.kind != FrameKind::Request {
        return Err(ProtocolError::UnexpectedFrame(frame.kind));
    }
    let key = fog
        .session_key(&session.iot_address)
        .ok_or(ProtocolError::NoSession(session.iot_address))?;
    let plain =
        symmetric_decrypt(&key, &frame.payload).map_err(|_| ProtocolError::DecryptionFailed)?;
    if plain.len() < REQUEST_HEADER_LEN {
        return Err(ProtocolError::MalformedFrame("short request"));
    }
    let payment = Amount::from_be_bytes(plain[..8].try_into().expect("sized"));
    let sig = Signature::from_bytes(plain[8..REQUEST_HEADER_LEN].try_into().expect("sized"));
    let package = &plain[REQUEST_HEADER_LEN..];

    let call = Call::IotFogPayment {
        fog: fog.address(),
        amount: payment,
        request_digest: crypto::hash(package),
    };
    let offer_valid = crypto::recover(&call.message(), &sig)
        .is_ok_and(|k| k.address() == session.iot_address);
    let funded = ledger
        .iot(&session.iot_address)
        .is_some_and(|r| r.avail_funds >= payment);
    let response = if offer_valid && funded {
        fog.respond(package)
    } else {
        FogResponse::Reject
    };
    Ok(match response {
        FogResponse::Result(tau) => Some(Frame::new(
            FrameKind::Result,
            symmetric_encrypt(&key, &tau, rng),
        )),
        FogResponse::Reject => Some(Frame::new(FrameKind::Reject, Vec::new())),
        FogResponse::Silent => None,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn service_exchange<R: RngCore + CryptoRng>(
    session: &Session,
    iot: &IotAgent,
    fog: &mut FogAgent,
    package: &[u8],
    payment: Amount,
    ledger: &mut Ledger,
    link: &mut Link,
    rng: &mut R,
) -> Result<ServiceExchange, ProtocolError> {
    let mut exchange = ServiceExchange::new(package, payment);
    let call = payment_call(session, payment, package);
    let sig = crypto::sign(&call.message(), iot.keys().secret())?;

    let mut plain = Vec::with_capacity(REQUEST_HEADER_LEN + package.len());
    plain.extend_from_slice(&payment.to_be_bytes());
    plain.extend_from_slice(&sig.to_bytes());
    plain.extend_from_slice(package);
    let request = Frame::new(
        FrameKind::Request,
        symmetric_encrypt(&session.symmetric_key, &plain, rng),
    );
    let Some(request) = link.transmit(Direction::IotToFog, request) else {
        exchange.advance(ExchangeStatus::TimedOut)?;
        return Ok(exchange);
    };

    let reply = match serve(fog, session, ledger, &request, rng)? {
        Some(frame) => link.transmit(Direction::FogToIot, frame),
        None => {
            link.silence();
            None
        }
    };
    let Some(reply) = reply else {
        exchange.advance(ExchangeStatus::TimedOut)?;
        return Ok(exchange);
    };
    match reply.kind {
        FrameKind::Reject => {
            exchange.advance(ExchangeStatus::Rejected)?;
            return Ok(exchange);
        }
        FrameKind::Result => {}
        other => return Err(ProtocolError::UnexpectedFrame(other)),
    }
    let tau = symmetric_decrypt(&session.symmetric_key, &reply.payload)
        .map_err(|_| ProtocolError::DecryptionFailed)?;
    exchange.result = Some(tau);
    exchange.advance(ExchangeStatus::Completed)?;

    ledger
        .submit(&Transaction {
            call,
            signature: sig,
        })
        .map_err(ProtocolError::PaymentFailed)?;
    exchange.advance(ExchangeStatus::Paid)?;
    Ok(exchange)
}
