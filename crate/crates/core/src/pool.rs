//! The general collateral model: a single pool from which any committed
//! portion can be flushed.

use alloc::collections::VecDeque;
use core::fmt;
use core::ops::{Add, AddAssign, Sub, SubAssign};

use crate::error::ModelError;
use crate::params::{ModelParams, PPM};
use crate::trace::{Event, EventKind};
use crate::tx::Transaction;

/// Pool collateral in micro-units (10⁻⁶ of a value unit).
///
/// A threshold flush of exactly `eta·C` with `eta` in ppm is always a whole
/// number of micro-units, so pool accounting stays exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Amount(u64);

impl Amount {
    pub const ZERO: Amount = Amount(0);

    pub const fn from_micros(micros: u64) -> Self {
        Amount(micros)
    }

    pub const fn from_units(units: u64) -> Self {
        Amount(units * PPM)
    }

    /// `ppm/10⁶` of `units`.
    pub const fn ppm_of(units: u64, ppm: u64) -> Self {
        Amount(units * ppm)
    }

    pub const fn micros(self) -> u64 {
        self.0
    }

    /// Whole value units, if exact.
    pub fn as_units(self) -> Option<u64> {
        self.0.is_multiple_of(PPM).then_some(self.0 / PPM)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Amount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let frac = self.0 % PPM;
        if frac == 0 {
            write!(f, "{}", self.0 / PPM)
        } else {
            let digits = alloc::format!("{frac:06}");
            write!(f, "{}.{}", self.0 / PPM, digits.trim_end_matches('0'))
        }
    }
}

impl Add for Amount {
    type Output = Amount;
    fn add(self, rhs: Amount) -> Amount {
        Amount(self.0 + rhs.0)
    }
}

impl Sub for Amount {
    type Output = Amount;
    fn sub(self, rhs: Amount) -> Amount {
        Amount(self.0 - rhs.0)
    }
}

impl AddAssign for Amount {
    fn add_assign(&mut self, rhs: Amount) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Amount {
    fn sub_assign(&mut self, rhs: Amount) {
        self.0 -= rhs.0;
    }
}

/// Flushed collateral returning at `available_at` (first slot of renewed
/// availability).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tranche {
    pub amount: Amount,
    pub available_at: u64,
}

/// `committed + Σ inflight + available = C` at every observable point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolState {
    capacity: Amount,
    flush_period: u64,
    committed: Amount,
    inflight: VecDeque<Tranche>,
    events: alloc::vec::Vec<Event>,
    record: bool,
}

impl PoolState {
    pub fn new(params: &ModelParams) -> Result<Self, ModelError> {
        params.validate_general()?;
        Self::with_capacity(params.collateral, params.flush_period)
    }

    pub fn with_capacity(collateral: u64, flush_period: u64) -> Result<Self, ModelError> {
        if collateral == 0 || flush_period == 0 {
            return Err(ModelError::InvalidParams("C and F must be positive"));
        }
        Ok(PoolState {
            capacity: Amount::from_units(collateral),
            flush_period,
            committed: Amount::ZERO,
            inflight: VecDeque::new(),
            events: alloc::vec::Vec::new(),
            record: true,
        })
    }

    pub fn silent(mut self) -> Self {
        self.record = false;
        self
    }

    pub fn capacity(&self) -> Amount {
        self.capacity
    }

    pub fn flush_period(&self) -> u64 {
        self.flush_period
    }

    pub fn committed(&self) -> Amount {
        self.committed
    }

    pub fn inflight(&self) -> impl Iterator<Item = &Tranche> {
        self.inflight.iter()
    }

    /// Collateral still offline at `slot`.
    pub fn offline_at(&self, slot: u64) -> Amount {
        self.inflight
            .iter()
            .filter(|t| t.available_at > slot)
            .fold(Amount::ZERO, |acc, t| acc + t.amount)
    }

    /// `C − committed − Σ{amount : available_at > slot}`.
    pub fn available_at(&self, slot: u64) -> Amount {
        self.capacity - self.committed - self.offline_at(slot)
    }

    /// Retires tranches that are back by `slot`.
    pub fn begin_slot(&mut self, slot: u64) {
        while let Some(front) = self.inflight.front().copied() {
            if front.available_at > slot {
                break;
            }
            self.inflight.pop_front();
            if self.record {
                let available = self.available_at(slot);
                self.events.push(Event {
                    flush_amount: Some(front.amount.micros()),
                    available: Some(available.micros()),
                    committed: Some(self.committed.micros()),
                    ..Event::new(slot, EventKind::Online)
                });
            }
        }
    }

    /// Observes availability at `slot`, retiring returned tranches first.
    pub fn observe(&mut self, slot: u64) -> Amount {
        self.begin_slot(slot);
        self.available_at(slot)
    }

    pub fn fits(&self, value: u64, slot: u64) -> bool {
        Amount::from_units(value) <= self.available_at(slot)
    }

    pub fn settle(&mut self, tx: &Transaction, slot: u64) -> Result<(), ModelError> {
        if tx.slot != slot {
            return Err(ModelError::SlotMismatch { tx_slot: tx.slot, slot });
        }
        let available = self.observe(slot);
        let needed = Amount::from_units(tx.value);
        if needed > available {
            return Err(ModelError::InsufficientCollateral {
                needed: needed.micros(),
                available: available.micros(),
            });
        }
        self.committed += needed;
        if self.record {
            self.events.push(Event {
                value: Some(tx.value),
                available: Some((available - needed).micros()),
                committed: Some(self.committed.micros()),
                ..Event::new(slot, EventKind::Settle)
            });
        }
        Ok(())
    }

    /// Moves `amount` of committed collateral offline; it returns at
    /// `slot + F + 1`. Costs one flush regardless of the amount.
    pub fn flush(&mut self, amount: Amount, slot: u64) -> Result<(), ModelError> {
        if amount.is_zero() {
            return Err(ModelError::ZeroFlush);
        }
        if amount > self.committed {
            return Err(ModelError::FlushExceedsCommitted {
                amount: amount.micros(),
                committed: self.committed.micros(),
            });
        }
        self.begin_slot(slot);
        self.committed -= amount;
        self.inflight.push_back(Tranche {
            amount,
            available_at: slot + self.flush_period + 1,
        });
        if self.record {
            let available = self.available_at(slot);
            self.events.push(Event {
                flush_amount: Some(amount.micros()),
                available: Some(available.micros()),
                committed: Some(self.committed.micros()),
                ..Event::new(slot, EventKind::Flush)
            });
        }
        Ok(())
    }

    pub fn push_event(&mut self, event: Event) {
        if self.record {
            self.events.push(event);
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn take_events(&mut self) -> alloc::vec::Vec<Event> {
        core::mem::take(&mut self.events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn units(u: u64) -> Amount {
        Amount::from_units(u)
    }

    #[test]
    fn fresh_pool() {
        let p = PoolState::new(&ModelParams::new(20, 6, 1)).unwrap();
        assert_eq!(p.available_at(1), units(20));
        assert!(PoolState::new(&ModelParams::new(0, 6, 1)).is_err());
        let profitable = ModelParams::new(20, 6, 1).with_utility(100_000, 1, 1);
        assert!(PoolState::new(&profitable).is_ok());
    }

    #[test]
    fn availability_tracks_tranches() {
        // committed = 2, one tranche of 10 back at slot 4
        let mut p = PoolState::with_capacity(20, 1).unwrap();
        p.settle(&Transaction::new(1, 6), 1).unwrap();
        p.settle(&Transaction::new(2, 6), 2).unwrap();
        p.flush(units(10), 2).unwrap();
        assert_eq!(p.committed(), units(2));
        assert_eq!(p.inflight().next().unwrap().available_at, 4);
        assert_eq!(p.available_at(3), units(8));
        assert_eq!(p.observe(4), units(18));
        assert_eq!(p.inflight().count(), 0);
    }

    #[test]
    fn settle_boundaries() {
        let mut p = PoolState::with_capacity(20, 1).unwrap();
        p.settle(&Transaction::new(1, 6), 1).unwrap();
        assert_eq!(p.committed(), units(6));
        let mut p = PoolState::with_capacity(6, 1).unwrap();
        p.settle(&Transaction::new(1, 6), 1).unwrap();
        assert_eq!(p.available_at(1), Amount::ZERO);
        let mut p = PoolState::with_capacity(2, 1).unwrap();
        assert!(matches!(
            p.settle(&Transaction::new(1, 6), 1),
            Err(ModelError::InsufficientCollateral { .. })
        ));
    }

    #[test]
    fn flush_guards() {
        let mut p = PoolState::with_capacity(20, 1).unwrap();
        p.settle(&Transaction::new(1, 4), 1).unwrap();
        assert!(matches!(
            p.flush(units(10), 1),
            Err(ModelError::FlushExceedsCommitted { .. })
        ));
        assert_eq!(p.flush(Amount::ZERO, 1), Err(ModelError::ZeroFlush));
        p.flush(units(4), 1).unwrap();
        assert_eq!(p.committed(), Amount::ZERO);
    }

    #[test]
    fn amount_display() {
        assert_eq!(units(10).to_string(), "10");
        assert_eq!(Amount::ppm_of(20, 418_000).to_string(), "8.36");
    }
}
