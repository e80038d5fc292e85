use alloc::vec::Vec;

use super::{Flushes, PolicyDecision, WalletPolicy};
use crate::tx::Transaction;
use crate::wallet::WalletBankState;

/// First fit over `W_1..W_k`; when a transaction fits no wallet, all `k`
/// wallets are flushed together and the transaction is discarded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlushAll;

impl WalletPolicy for FlushAll {
    fn name(&self) -> &'static str {
        "fa"
    }

    fn decide(&mut self, bank: &WalletBankState, slot: u64, tx: Option<&Transaction>) -> PolicyDecision {
        let Some(tx) = tx else {
            return PolicyDecision::idle();
        };
        let n = bank.wallet_count();
        // flush phase
        if (0..n).any(|i| !matches!(bank.is_available(i, slot), Ok(true))) {
            return PolicyDecision::discard();
        }
        match (0..n).find(|&i| bank.fits(i, tx.value, slot)) {
            Some(i) => PolicyDecision::settle_in(i),
            None => PolicyDecision::discard().with_flushes(Flushes::Wallets((0..n).collect::<Vec<_>>())),
        }
    }
}
