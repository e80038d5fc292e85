use alloc::vec;

use super::{Flushes, PolicyDecision, WalletPolicy};
use crate::tx::Transaction;
use crate::wallet::WalletBankState;

/// Round-robin over a single active wallet.
///
/// The transaction that does not fit triggers the flush and is discarded.
/// The successor in cyclic order becomes active; while it is still offline,
/// arrivals are discarded even if a later wallet is online.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlushWhenFull {
    active: usize,
}

impl FlushWhenFull {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn active(&self) -> usize {
        self.active
    }
}

impl WalletPolicy for FlushWhenFull {
    fn name(&self) -> &'static str {
        "fwf"
    }

    fn decide(&mut self, bank: &WalletBankState, slot: u64, tx: Option<&Transaction>) -> PolicyDecision {
        let Some(tx) = tx else {
            return PolicyDecision::idle();
        };
        let active = self.active;
        if !matches!(bank.is_available(active, slot), Ok(true)) {
            return PolicyDecision::discard();
        }
        if bank.fits(active, tx.value, slot) {
            return PolicyDecision::settle_in(active);
        }
        self.active = (active + 1) % bank.wallet_count();
        PolicyDecision::discard().with_flushes(Flushes::Wallets(vec![active]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{sim, ModelParams, RunOptions, TransactionSequence};
    use alloc::vec::Vec;

    #[test]
    fn constant_six_trace() {
        let params = ModelParams::kwallet(20, 2, 6, 1);
        let seq = TransactionSequence::from_values(&[6, 6, 6, 6, 6]).unwrap();
        let run = sim::run_wallet_policy(&mut FlushWhenFull::new(), &params, &seq, RunOptions::value_only()).unwrap();
        let settled: Vec<(u64, Option<usize>)> = run.settles().map(|e| (e.slot, e.wallet)).collect();
        assert_eq!(settled, [(1, Some(0)), (3, Some(1)), (5, Some(0))]);
        let flushed: Vec<(u64, Option<usize>)> = run.flushes().map(|e| (e.slot, e.wallet)).collect();
        assert_eq!(flushed, [(2, Some(0)), (4, Some(1))]);
        assert_eq!((run.settled_value, run.flush_count), (18, 2));
    }

    #[test]
    fn single_wallet_alternating_micro_and_full() {
        // k = 1, wallet size = T = 10: FWF keeps the micros and loses every full one.
        let params = ModelParams::kwallet(10, 1, 10, 1);
        let values: Vec<Option<u64>> = (0..6).flat_map(|_| [Some(1), Some(10), None]).collect();
        let seq = TransactionSequence::from_slots(&values).unwrap();
        let run = sim::run_wallet_policy(&mut FlushWhenFull::new(), &params, &seq, RunOptions::value_only()).unwrap();
        assert!(run.settles().all(|e| e.value == Some(1)));
        assert_eq!(run.settled_value, 6);
    }

    #[test]
    fn waits_for_successor() {
        let mut bank = WalletBankState::with_wallets(2, 10, 5).unwrap();
        let mut p = FlushWhenFull::new();
        bank.flush(1, 1).unwrap();
        bank.settle(0, &Transaction::new(2, 9), 2).unwrap();
        let d = p.decide(&bank, 3, Some(&Transaction::new(3, 5)));
        assert_eq!(d.flushes, Flushes::Wallets(vec![0]));
        bank.flush(0, 3).unwrap();
        // W2 still offline until slot 6: discard even though nothing else is open
        let d = p.decide(&bank, 4, Some(&Transaction::new(4, 1)));
        assert_eq!(d, PolicyDecision::discard());
        assert_eq!(p.decide(&bank, 5, None), PolicyDecision::idle());
        assert_eq!(p.active(), 1);
    }
}
