//! In-process point-to-point link with a tick clock, injectable faults and a
//! transcript recorder.
//!
//! Delivery is synchronous: [`Link::transmit`] either hands the decoded frame
//! to the receiver after `delay` ticks, or reports a timeout once the
//! receiver's budget is spent.

use serde::{Deserialize, Serialize};

use super::frame::{Frame, FrameKind};

pub const DEFAULT_TIMEOUT_TICKS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    IotToFog,
    FogToIot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkConfig {
    pub delay_ticks: u64,
    pub timeout_ticks: u64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            delay_ticks: 1,
            timeout_ticks: DEFAULT_TIMEOUT_TICKS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultAction {
    Drop,
    /// Extra ticks added on top of the base delay.
    Delay(u64),
    /// Flip the last payload byte.
    Tamper,
}

/// Applies to every frame of `kind` travelling in `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fault {
    pub direction: Direction,
    pub kind: FrameKind,
    pub action: FaultAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub tick: u64,
    pub direction: Direction,
    pub kind: FrameKind,
    pub wire_len: usize,
    pub delivered: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u8,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub frames: Vec<FrameRecord>,
    pub steps: Vec<StepRecord>,
}

impl Transcript {
    /// Everything an on-path observer sees, minus timing.
    pub fn shape(&self) -> Vec<(Direction, FrameKind, usize)> {
        self.frames
            .iter()
            .filter(|f| f.delivered)
            .map(|f| (f.direction, f.kind, f.wire_len))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript is plain data")
    }
}

#[derive(Debug, Clone, Default)]
pub struct Link {
    config: LinkConfig,
    faults: Vec<Fault>,
    now: u64,
    transcript: Transcript,
}

impl Link {
    pub fn new(config: LinkConfig) -> Self {
        Self {
            config,
            ..Self::default()
        }
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.faults.push(fault);
        self
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn take_transcript(&mut self) -> Transcript {
        std::mem::take(&mut self.transcript)
    }

    pub(crate) fn step(&mut self, step: u8, text: impl Into<String>) {
        self.transcript.steps.push(StepRecord {
            step,
            text: text.into(),
        });
    }

    /// Sends a frame; returns it as decoded by the receiver, or `None` if the
    /// receiver timed out waiting.
    pub fn transmit(&mut self, direction: Direction, frame: Frame) -> Option<Frame> {
        let mut bytes = frame.encode();
        let mut delay = self.config.delay_ticks;
        let mut dropped = false;
        for f in &self.faults {
            if f.direction != direction || f.kind != frame.kind {
                continue;
            }
            match f.action {
                FaultAction::Drop => dropped = true,
                FaultAction::Delay(extra) => delay += extra,
                FaultAction::Tamper => {
                    if let Some(last) = bytes.last_mut() {
                        *last ^= 0x01;
                    }
                }
            }
        }
        let delivered = !dropped && delay <= self.config.timeout_ticks;
        self.transcript.frames.push(FrameRecord {
            tick: self.now,
            direction,
            kind: frame.kind,
            wire_len: bytes.len(),
            delivered,
        });
        if delivered {
            self.now += delay;
            // Tampering touches the payload only, so the header stays valid.
            Some(Frame::decode(&bytes).expect("header untouched"))
        } else {
            self.now += self.config.timeout_ticks;
            None
        }
    }

    /// Records that a party sent nothing; the peer waits out its budget.
    pub(crate) fn silence(&mut self) {
        self.now += self.config.timeout_ticks;
    }
}
