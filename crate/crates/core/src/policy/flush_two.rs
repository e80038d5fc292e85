use alloc::vec;

use super::{Flushes, PolicyDecision, WalletPolicy};
use crate::error::ModelError;
use crate::tx::Transaction;
use crate::wallet::WalletBankState;

/// Wallets paired as `(W_{2j-1}, W_{2j})`. The active pair tries its first
/// wallet, then its second; if neither fits, both are flushed, the trigger is
/// discarded and the next pair (cyclic) becomes active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlushTwoWhenFull {
    pair: usize,
    pairs: usize,
}

impl FlushTwoWhenFull {
    pub fn new(wallets: u64) -> Result<Self, ModelError> {
        if wallets < 2 || !wallets.is_multiple_of(2) {
            return Err(ModelError::OddWalletCount(wallets));
        }
        Ok(FlushTwoWhenFull {
            pair: 0,
            pairs: (wallets / 2) as usize,
        })
    }

    pub fn active_pair(&self) -> usize {
        self.pair
    }
}

impl WalletPolicy for FlushTwoWhenFull {
    fn name(&self) -> &'static str {
        "ftwf"
    }

    fn decide(&mut self, bank: &WalletBankState, slot: u64, tx: Option<&Transaction>) -> PolicyDecision {
        let Some(tx) = tx else {
            return PolicyDecision::idle();
        };
        let (first, second) = (2 * self.pair, 2 * self.pair + 1);
        let online = |i| matches!(bank.is_available(i, slot), Ok(true));
        if !online(first) || !online(second) {
            return PolicyDecision::discard();
        }
        if bank.fits(first, tx.value, slot) {
            return PolicyDecision::settle_in(first);
        }
        if bank.fits(second, tx.value, slot) {
            return PolicyDecision::settle_in(second);
        }
        self.pair = (self.pair + 1) % self.pairs;
        PolicyDecision::discard().with_flushes(Flushes::Wallets(vec![first, second]))
    }
}
