//! The k-wallet bank: `k` wallets of `C/k` collateral, each flushed whole.

use alloc::vec::Vec;

use crate::error::ModelError;
use crate::params::ModelParams;
use crate::trace::{Event, EventKind};
use crate::tx::Transaction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Wallet {
    remaining: u64,
    /// Offline for every slot `<= offline_until`; 0 when never flushed.
    offline_until: u64,
    /// Flushed and not yet restored to full size.
    resetting: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalletBankState {
    wallet_size: u64,
    flush_period: u64,
    wallets: Vec<Wallet>,
    events: Vec<Event>,
    record: bool,
}

impl WalletBankState {
    /// `k` wallets of `C/k`, all online.
    pub fn new(params: &ModelParams) -> Result<Self, ModelError> {
        params.validate_kwallet()?;
        Self::with_wallets(params.wallets as usize, params.wallet_size(), params.flush_period)
    }

    /// A bank of `count` wallets of `size`, independent of any `ModelParams`.
    pub fn with_wallets(count: usize, size: u64, flush_period: u64) -> Result<Self, ModelError> {
        if count == 0 || size == 0 || flush_period == 0 {
            return Err(ModelError::InvalidParams(
                "wallet count, size and flush period must be positive",
            ));
        }
        let fresh = Wallet {
            remaining: size,
            offline_until: 0,
            resetting: false,
        };
        Ok(WalletBankState {
            wallet_size: size,
            flush_period,
            wallets: alloc::vec![fresh; count],
            events: Vec::new(),
            record: true,
        })
    }

    /// Stops recording events (used for internal shadow banks).
    pub fn silent(mut self) -> Self {
        self.record = false;
        self
    }

    pub fn wallet_count(&self) -> usize {
        self.wallets.len()
    }

    pub fn wallet_size(&self) -> u64 {
        self.wallet_size
    }

    pub fn flush_period(&self) -> u64 {
        self.flush_period
    }

    fn wallet(&self, i: usize) -> Result<&Wallet, ModelError> {
        self.wallets.get(i).ok_or(ModelError::IndexOutOfRange {
            index: i,
            count: self.wallets.len(),
        })
    }

    /// True iff wallet `i` is online at `slot`.
    pub fn is_available(&self, i: usize, slot: u64) -> Result<bool, ModelError> {
        Ok(self.wallet(i)?.offline_until < slot)
    }

    pub fn offline_until(&self, i: usize) -> Result<u64, ModelError> {
        Ok(self.wallet(i)?.offline_until)
    }

    /// Uncommitted collateral of wallet `i` as seen at `slot`.
    pub fn remaining_at(&self, i: usize, slot: u64) -> Result<u64, ModelError> {
        let w = self.wallet(i)?;
        if w.resetting && w.offline_until < slot {
            Ok(self.wallet_size)
        } else {
            Ok(w.remaining)
        }
    }

    /// Stored uncommitted collateral; a flushed wallet keeps its pre-flush
    /// value until it is restored at `offline_until + 1`.
    pub fn remaining(&self, i: usize) -> Result<u64, ModelError> {
        Ok(self.wallet(i)?.remaining)
    }

    /// Settled-but-unflushed collateral in wallet `i`.
    pub fn committed(&self, i: usize) -> Result<u64, ModelError> {
        let w = self.wallet(i)?;
        Ok(if w.resetting { 0 } else { self.wallet_size - w.remaining })
    }

    /// True when wallet `i` is online at `slot` and can take `value`.
    pub fn fits(&self, i: usize, value: u64, slot: u64) -> bool {
        matches!(self.is_available(i, slot), Ok(true)) && self.remaining_at(i, slot).is_ok_and(|r| value <= r)
    }

    /// Restores every wallet whose flush period has ended before `slot`.
    pub fn begin_slot(&mut self, slot: u64) {
        for i in 0..self.wallets.len() {
            self.restore(i, slot);
        }
    }

    fn restore(&mut self, i: usize, slot: u64) {
        let size = self.wallet_size;
        let w = &mut self.wallets[i];
        if w.resetting && w.offline_until < slot {
            w.resetting = false;
            w.remaining = size;
            if self.record {
                self.events.push(Event {
                    wallet: Some(i),
                    available: Some(size),
                    committed: Some(0),
                    ..Event::new(slot, EventKind::Online)
                });
            }
        }
    }

    pub fn settle(&mut self, i: usize, tx: &Transaction, slot: u64) -> Result<(), ModelError> {
        if tx.slot != slot {
            return Err(ModelError::SlotMismatch { tx_slot: tx.slot, slot });
        }
        if !self.is_available(i, slot)? {
            return Err(ModelError::WalletOffline { wallet: i, slot });
        }
        self.restore(i, slot);
        let size = self.wallet_size;
        let w = &mut self.wallets[i];
        if tx.value > w.remaining {
            return Err(ModelError::InsufficientCollateral {
                needed: tx.value,
                available: w.remaining,
            });
        }
        w.remaining -= tx.value;
        let remaining = w.remaining;
        if self.record {
            self.events.push(Event {
                wallet: Some(i),
                value: Some(tx.value),
                available: Some(remaining),
                committed: Some(size - remaining),
                ..Event::new(slot, EventKind::Settle)
            });
        }
        Ok(())
    }

    /// Takes wallet `i` offline for `slot+1..=slot+F`; returns the committed
    /// collateral that was flushed. Flushing an unused wallet is allowed.
    pub fn flush(&mut self, i: usize, slot: u64) -> Result<u64, ModelError> {
        if !self.is_available(i, slot)? {
            return Err(ModelError::WalletOffline { wallet: i, slot });
        }
        self.restore(i, slot);
        let size = self.wallet_size;
        let until = slot + self.flush_period;
        let w = &mut self.wallets[i];
        let committed = size - w.remaining;
        w.offline_until = until;
        w.resetting = true;
        if self.record {
            self.events.push(Event {
                wallet: Some(i),
                flush_amount: Some(committed),
                ..Event::new(slot, EventKind::Flush)
            });
        }
        Ok(committed)
    }

    pub fn push_event(&mut self, event: Event) {
        if self.record {
            self.events.push(event);
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn take_events(&mut self) -> Vec<Event> {
        core::mem::take(&mut self.events)
    }
}
