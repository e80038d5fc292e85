//! Slot-by-slot drivers.
//!
//! Within a slot: returning collateral is restored, the transaction (if any)
//! arrives, the settle/discard decision is applied, then flushes.

use alloc::vec::Vec;

use crate::error::ModelError;
use crate::params::ModelParams;
use crate::policy::{Action, Flushes, PolicyDecision, Target, ThresholdPolicy, WalletPolicy};
use crate::pool::PoolState;
use crate::trace::{Event, EventKind, RunResult};
use crate::tx::{Transaction, TransactionSequence};
use crate::wallet::WalletBankState;

/// How simultaneous wallet flushes are billed in the utility.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum FlushCostMode {
    /// `tau` per wallet flushed.
    #[default]
    PerWallet,
    /// `tau` per flush action, however many wallets it covers.
    PerAction,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Flush leftover committed collateral after the last slot.
    pub terminal_flush: bool,
    pub flush_cost: FlushCostMode,
}

impl RunOptions {
    pub fn value_only() -> Self {
        RunOptions {
            terminal_flush: false,
            flush_cost: FlushCostMode::PerWallet,
        }
    }

    pub fn utility() -> Self {
        RunOptions {
            terminal_flush: true,
            flush_cost: FlushCostMode::PerWallet,
        }
    }
}

/// Stepwise k-wallet run; lets adaptive workloads observe each decision.
pub struct WalletRun<'p, P: ?Sized> {
    policy: &'p mut P,
    bank: WalletBankState,
    params: ModelParams,
    options: RunOptions,
    last_slot: u64,
    n_tx: usize,
    offered: u64,
}

impl<'p, P: WalletPolicy + ?Sized> WalletRun<'p, P> {
    pub fn new(policy: &'p mut P, params: &ModelParams, options: RunOptions) -> Result<Self, ModelError> {
        Ok(WalletRun {
            policy,
            bank: WalletBankState::new(params)?,
            params: *params,
            options,
            last_slot: 0,
            n_tx: 0,
            offered: 0,
        })
    }

    pub fn bank(&self) -> &WalletBankState {
        &self.bank
    }

    /// Processes one slot. Slots must be visited in increasing order.
    pub fn step(&mut self, slot: u64, tx: Option<&Transaction>) -> Result<PolicyDecision, ModelError> {
        if let Some(tx) = tx {
            if tx.slot != slot {
                return Err(ModelError::SlotMismatch { tx_slot: tx.slot, slot });
            }
            if tx.value > self.params.max_value {
                return Err(ModelError::InvalidSequence("transaction value exceeds T"));
            }
        }
        self.last_slot = slot;
        self.bank.begin_slot(slot);
        if let Some(tx) = tx {
            self.n_tx += 1;
            self.offered += tx.value;
            self.bank.push_event(Event::arrive(slot, tx.value));
        }
        let decision = self.policy.decide(&self.bank, slot, tx);
        match (decision.action, tx) {
            (Action::Settle(Target::Wallet(i)), Some(tx)) => self.bank.settle(i, tx, slot)?,
            (Action::Settle(Target::Pool), _) => {
                return Err(ModelError::InvalidParams("pool decision in the k-wallet model"))
            }
            (Action::Discard, Some(tx)) => self.bank.push_event(Event::discard(slot, tx.value)),
            _ => {}
        }
        if let Flushes::Wallets(ws) = &decision.flushes {
            for &w in ws {
                self.bank.flush(w, slot)?;
            }
        }
        Ok(decision)
    }

    pub fn finish(mut self) -> Result<RunResult, ModelError> {
        let mut terminal = 0;
        if self.options.terminal_flush {
            let slot = self.last_slot;
            for i in 0..self.bank.wallet_count() {
                if self.bank.is_available(i, slot)? && self.bank.committed(i)? > 0 {
                    self.bank.flush(i, slot)?;
                    terminal += 1;
                }
            }
        }
        let events = self.bank.take_events();
        Ok(summarize(
            events,
            &self.params,
            self.options,
            self.n_tx,
            self.offered,
            terminal,
        ))
    }
}

fn summarize(
    events: Vec<Event>,
    params: &ModelParams,
    options: RunOptions,
    n_tx: usize,
    offered_value: u64,
    terminal_flushes: u64,
) -> RunResult {
    let mut settled_value = 0;
    let mut flush_count = 0;
    let mut flush_actions = 0;
    let mut last_flush_slot = None;
    for e in &events {
        match e.kind {
            EventKind::Settle => settled_value += e.value.unwrap_or(0),
            EventKind::Flush => {
                flush_count += 1;
                if last_flush_slot != Some(e.slot) {
                    flush_actions += 1;
                    last_flush_slot = Some(e.slot);
                }
            }
            _ => {}
        }
    }
    let billed = match options.flush_cost {
        FlushCostMode::PerWallet => flush_count,
        FlushCostMode::PerAction => flush_actions,
    };
    RunResult {
        utility: params.utility(settled_value, billed),
        events,
        n_tx,
        offered_value,
        settled_value,
        flush_count,
        flush_actions,
        terminal_flushes,
    }
}

/// Runs a k-wallet policy over slots `1..=horizon`.
pub fn run_wallet_policy<P: WalletPolicy + ?Sized>(
    policy: &mut P,
    params: &ModelParams,
    seq: &TransactionSequence,
    options: RunOptions,
) -> Result<RunResult, ModelError> {
    seq.check_max_value(params.max_value)?;
    let mut run = WalletRun::new(policy, params, options)?;
    let mut txs = seq.txs().iter().peekable();
    for slot in 1..=seq.horizon() {
        let tx = txs.next_if(|t| t.slot == slot);
        run.step(slot, tx)?;
    }
    run.finish()
}

/// Runs the threshold policy over slots `1..=horizon` in the pool model.
pub fn run_pool_policy(
    policy: &mut ThresholdPolicy,
    params: &ModelParams,
    seq: &TransactionSequence,
    options: RunOptions,
) -> Result<RunResult, ModelError> {
    seq.check_max_value(params.max_value)?;
    let mut pool = PoolState::new(params)?;
    let mut txs = seq.txs().iter().peekable();
    let mut n_tx = 0;
    let mut offered = 0;
    for slot in 1..=seq.horizon() {
        pool.begin_slot(slot);
        let tx = txs.next_if(|t| t.slot == slot);
        if let Some(tx) = tx {
            n_tx += 1;
            offered += tx.value;
            pool.push_event(Event::arrive(slot, tx.value));
        }
        let decision = policy.decide(&pool, slot, tx);
        match (decision.action, tx) {
            (Action::Settle(_), Some(tx)) => pool.settle(tx, slot)?,
            (Action::Discard, Some(tx)) => pool.push_event(Event::discard(slot, tx.value)),
            _ => {}
        }
        if let Flushes::Pool(amount) = decision.flushes {
            pool.flush(amount, slot)?;
        }
    }
    let mut terminal = 0;
    if options.terminal_flush && !pool.committed().is_zero() {
        pool.flush(pool.committed(), seq.horizon())?;
        terminal = 1;
    }
    let events = pool.take_events();
    Ok(summarize(events, params, options, n_tx, offered, terminal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::FlushWhenFull;

    #[test]
    fn value_check_against_t() {
        let params = ModelParams::kwallet(20, 2, 6, 1);
        let seq = TransactionSequence::from_values(&[7]).unwrap();
        assert!(run_wallet_policy(&mut FlushWhenFull::new(), &params, &seq, RunOptions::value_only()).is_err());
    }

    #[test]
    fn terminal_flush_in_utility_runs() {
        let params = ModelParams::kwallet(20, 2, 6, 1).with_utility(100_000, 1, 2);
        let seq = TransactionSequence::from_values(&[6, 6, 6, 6, 6]).unwrap();
        let v = run_wallet_policy(&mut FlushWhenFull::new(), &params, &seq, RunOptions::value_only()).unwrap();
        let u = run_wallet_policy(&mut FlushWhenFull::new(), &params, &seq, RunOptions::utility()).unwrap();
        assert_eq!(v.flush_count, 2);
        assert_eq!(u.flush_count, 3);
        assert_eq!(u.terminal_flushes, 1);
        assert_eq!(u.settled_value, 18);
    }

    #[test]
    fn per_action_billing() {
        use crate::policy::FlushAll;
        let params = ModelParams::kwallet(20, 2, 6, 1).with_utility(100_000, 1, 2);
        let seq = TransactionSequence::from_values(&[6, 6, 6]).unwrap();
        let per_wallet = run_wallet_policy(&mut FlushAll, &params, &seq, RunOptions::value_only()).unwrap();
        let per_action = run_wallet_policy(
            &mut FlushAll,
            &params,
            &seq,
            RunOptions {
                terminal_flush: false,
                flush_cost: FlushCostMode::PerAction,
            },
        )
        .unwrap();
        assert_eq!((per_wallet.flush_count, per_wallet.flush_actions), (2, 1));
        // 0.1 * 12 - 0.5 * 2 vs 0.1 * 12 - 0.5
        assert_eq!(per_wallet.utility, crate::Rational::new(1, 5));
        assert_eq!(per_action.utility, crate::Rational::new(7, 10));
    }
}
