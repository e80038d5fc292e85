//! Per-slot event records and run totals.
//!
//! Wallet indices are 0-based. Amount fields (`flush_amount`, `available`,
//! `committed`) are in value units for wallet events and in micro-units
//! (millionths of a value unit, see [`crate::Amount`]) for pool events.

use alloc::vec::Vec;

use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EventKind {
    Arrive,
    Settle,
    Discard,
    Flush,
    Online,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct Event {
    pub slot: u64,
    pub kind: EventKind,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub wallet: Option<usize>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub value: Option<u64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub flush_amount: Option<u64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub available: Option<u64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub committed: Option<u64>,
}

impl Event {
    pub fn new(slot: u64, kind: EventKind) -> Self {
        Event {
            slot,
            kind,
            wallet: None,
            value: None,
            flush_amount: None,
            available: None,
            committed: None,
        }
    }

    pub fn arrive(slot: u64, value: u64) -> Self {
        Event {
            value: Some(value),
            ..Event::new(slot, EventKind::Arrive)
        }
    }

    pub fn discard(slot: u64, value: u64) -> Self {
        Event {
            value: Some(value),
            ..Event::new(slot, EventKind::Discard)
        }
    }
}

/// Outcome of one policy run over a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub events: Vec<Event>,
    pub n_tx: usize,
    pub offered_value: u64,
    /// `V`, the sum of settle-event values.
    pub settled_value: u64,
    /// `f`, one per wallet flushed or per pool flush operation.
    pub flush_count: u64,
    /// Distinct flush actions; a simultaneous flush of several wallets is one.
    pub flush_actions: u64,
    /// Flush events appended after the last slot (sequence-end cleanup).
    pub terminal_flushes: u64,
    /// `U = p·V − tau·f` under the run's flush-cost mode.
    pub utility: Rational,
}

impl RunResult {
    pub fn settles(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.kind == EventKind::Settle)
    }

    pub fn flushes(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.kind == EventKind::Flush)
    }

    /// Settled value over slots `<= slot`.
    pub fn settled_through(&self, slot: u64) -> u64 {
        self.settles().filter(|e| e.slot <= slot).filter_map(|e| e.value).sum()
    }
}
