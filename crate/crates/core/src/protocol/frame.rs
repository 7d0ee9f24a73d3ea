//! Length-prefixed typed frames: `kind (1) || payload length (4, BE) || payload`.

use serde::{Deserialize, Serialize};

use super::ProtocolError;

pub const FRAME_HEADER_LEN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FrameKind {
    /// IoT → fog: `nonce_i (32) || sig_i (65)`.
    Auth1 = 1,
    /// Fog → IoT: `nonce_f (32) || sig_f (65)`, `sig_f` covers both nonces.
    Auth2 = 2,
    /// IoT → fog, encrypted: `payment (8, BE) || sig over payment call (65) || package`.
    Request = 3,
    /// Fog → IoT, encrypted result bytes.
    Result = 4,
    /// Fog → IoT, empty payload.
    Reject = 5,
}

impl FrameKind {
    fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            1 => Self::Auth1,
            2 => Self::Auth2,
            3 => Self::Request,
            4 => Self::Result,
            5 => Self::Reject,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(kind: FrameKind, payload: Vec<u8>) -> Self {
        Self { kind, payload }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FRAME_HEADER_LEN + self.payload.len());
        out.push(self.kind as u8);
        out.extend_from_slice(&(self.payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolError> {
        if bytes.len() < FRAME_HEADER_LEN {
            return Err(ProtocolError::MalformedFrame("truncated header"));
        }
        let kind = FrameKind::from_byte(bytes[0])
            .ok_or(ProtocolError::MalformedFrame("unknown frame kind"))?;
        let len = u32::from_be_bytes(bytes[1..5].try_into().expect("4 bytes")) as usize;
        if bytes.len() - FRAME_HEADER_LEN != len {
            return Err(ProtocolError::MalformedFrame("length prefix mismatch"));
        }
        Ok(Self::new(kind, bytes[FRAME_HEADER_LEN..].to_vec()))
    }

    pub fn wire_len(&self) -> usize {
        FRAME_HEADER_LEN + self.payload.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = Frame::new(FrameKind::Request, b"payload".to_vec());
        let bytes = f.encode();
        assert_eq!(bytes[0], 3);
        assert_eq!(&bytes[1..5], &[0, 0, 0, 7]);
        assert_eq!(Frame::decode(&bytes).unwrap(), f);
        assert_eq!(f.wire_len(), bytes.len());
    }

    #[test]
    fn rejects_malformed() {
        assert!(Frame::decode(&[1, 0, 0]).is_err());
        assert!(Frame::decode(&[9, 0, 0, 0, 0]).is_err());
        assert!(Frame::decode(&[1, 0, 0, 0, 2, 0]).is_err());
        assert_eq!(
            Frame::decode(&[5, 0, 0, 0, 0]).unwrap(),
            Frame::new(FrameKind::Reject, vec![])
        );
    }
}
