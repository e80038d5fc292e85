//! Exact offline optima for small instances, plus cheap upper bounds.
//!
//! In the general value model flushing is free, so a set of transactions can
//! be settled iff every window of `F + 1` consecutive slots holds at most `C`
//! of it. The brute-force searches below rely on two exchange arguments:
//! flushing as soon as a batch's last transaction settles is never worse
//! than flushing later, and a flush might as well take everything that is
//! committed.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::OracleError;
use crate::params::{ModelParams, PPM};
use crate::pool::PoolState;
use crate::tx::{Transaction, TransactionSequence};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_transactions: usize,
    /// Longest horizon accepted by the decision-tree searches.
    pub max_flush_slots: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_transactions: 12,
            max_flush_slots: 4096,
        }
    }
}

impl OracleBudget {
    pub fn with_max_transactions(max_transactions: usize) -> Self {
        OracleBudget {
            max_transactions,
            ..Self::default()
        }
    }

    fn admit(&self, seq: &TransactionSequence) -> Result<(), OracleError> {
        if seq.len() > self.max_transactions {
            return Err(OracleError::BudgetExceeded {
                len: seq.len(),
                max: self.max_transactions,
            });
        }
        if seq.horizon() > self.max_flush_slots {
            return Err(OracleError::BudgetExceeded {
                len: seq.horizon() as usize,
                max: self.max_flush_slots as usize,
            });
        }
        Ok(())
    }
}

/// An optimal value with one subset that attains it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptValue {
    pub value: u64,
    pub witness: Vec<Transaction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptUtility {
    pub utility: Rational,
    pub value: u64,
    /// Flushes including the terminal one.
    pub flushes: u64,
    pub witness: Vec<Transaction>,
}

/// True iff every window `[t, t + F]` holds at most `C` of `subset`.
///
/// `subset` must be sorted by slot.
pub fn feasible_window_check(subset: &[Transaction], collateral: u64, flush_period: u64) -> bool {
    let mut start = 0;
    let mut sum = 0u64;
    for (end, tx) in subset.iter().enumerate() {
        sum += tx.value;
        while subset[start].slot + flush_period < tx.slot {
            sum -= subset[start].value;
            start += 1;
        }
        debug_assert!(start <= end);
        if sum > collateral {
            return false;
        }
    }
    true
}

/// Maximum settleable value in the general model: the best subset passing
/// [`feasible_window_check`], found by exhaustive include/exclude search.
pub fn opt_general_value(
    seq: &TransactionSequence,
    collateral: u64,
    flush_period: u64,
    budget: &OracleBudget,
) -> Result<OptValue, OracleError> {
    budget.admit(seq)?;
    if collateral == 0 {
        return Err(OracleError::InvalidParams("C must be positive"));
    }
    let txs = seq.txs();
    let suffix = suffix_sums(txs);
    let mut search = SubsetSearch {
        txs,
        suffix: &suffix,
        collateral,
        flush_period,
        chosen: Vec::with_capacity(txs.len()),
        best: OptValue {
            value: 0,
            witness: Vec::new(),
        },
    };
    search.run(0, 0);
    Ok(search.best)
}

fn suffix_sums(txs: &[Transaction]) -> Vec<u64> {
    let mut s = alloc::vec![0; txs.len() + 1];
    for i in (0..txs.len()).rev() {
        s[i] = s[i + 1] + txs[i].value;
    }
    s
}

struct SubsetSearch<'a> {
    txs: &'a [Transaction],
    suffix: &'a [u64],
    collateral: u64,
    flush_period: u64,
    chosen: Vec<Transaction>,
    best: OptValue,
}

impl SubsetSearch<'_> {
    fn run(&mut self, i: usize, value: u64) {
        if value > self.best.value {
            self.best = OptValue {
                value,
                witness: self.chosen.clone(),
            };
        }
        if i == self.txs.len() || value + self.suffix[i] <= self.best.value {
            return;
        }
        let tx = self.txs[i];
        let window: u64 = self
            .chosen
            .iter()
            .rev()
            .take_while(|c| c.slot + self.flush_period >= tx.slot)
            .map(|c| c.value)
            .sum();
        if window + tx.value <= self.collateral {
            self.chosen.push(tx);
            self.run(i + 1, value + tx.value);
            self.chosen.pop();
        }
        self.run(i + 1, value);
    }
}

/// The general value optimum found by driving [`PoolState`] through every
/// settle/discard and flush/keep choice at each arrival.
pub fn decision_tree_general_value(
    seq: &TransactionSequence,
    collateral: u64,
    flush_period: u64,
    budget: &OracleBudget,
) -> Result<OptValue, OracleError> {
    budget.admit(seq)?;
    let pool = PoolState::with_capacity(collateral, flush_period)
        .map_err(|_| OracleError::InvalidParams("C and F must be positive"))?
        .silent();
    let txs = seq.txs();
    let suffix = suffix_sums(txs);
    let mut tree = DecisionTree {
        txs,
        suffix: &suffix,
        chosen: Vec::new(),
        best: OptValue {
            value: 0,
            witness: Vec::new(),
        },
    };
    tree.run(0, 0, pool);
    Ok(tree.best)
}

struct DecisionTree<'a> {
    txs: &'a [Transaction],
    suffix: &'a [u64],
    chosen: Vec<Transaction>,
    best: OptValue,
}

impl DecisionTree<'_> {
    fn run(&mut self, i: usize, value: u64, pool: PoolState) {
        if value > self.best.value {
            self.best = OptValue {
                value,
                witness: self.chosen.clone(),
            };
        }
        if i == self.txs.len() || value + self.suffix[i] <= self.best.value {
            return;
        }
        let tx = self.txs[i];
        let mut settled = pool.clone();
        if settled.settle(&tx, tx.slot).is_ok() {
            self.chosen.push(tx);
            let mut flushed = settled.clone();
            let committed = flushed.committed();
            if flushed.flush(committed, tx.slot).is_ok() {
                self.run(i + 1, value + tx.value, flushed);
            }
            self.run(i + 1, value + tx.value, settled);
            self.chosen.pop();
        }
        let mut flushed = pool.clone();
        let committed = flushed.committed();
        if !committed.is_zero() && flushed.flush(committed, tx.slot).is_ok() {
            self.run(i + 1, value, flushed);
        }
        self.run(i + 1, value, pool);
    }
}

/// Exact optimum of the discrete k-wallet model.
///
/// Each wallet's settled transactions form consecutive batches of total at
/// most `C/k`; a new batch may start only after the previous batch's last
/// slot plus `F`. Wallet states are kept sorted so that symmetric
/// assignments share memo entries.
pub fn opt_kwallet_value(
    seq: &TransactionSequence,
    params: &ModelParams,
    budget: &OracleBudget,
) -> Result<u64, OracleError> {
    budget.admit(seq)?;
    params
        .validate_kwallet()
        .map_err(|_| OracleError::InvalidParams("invalid k-wallet parameters"))?;
    let size = params.wallet_size();
    let fresh = WalletSlot {
        last: 0,
        remaining: size,
    };
    let mut search = KWalletSearch {
        txs: seq.txs(),
        size,
        flush_period: params.flush_period,
        memo: BTreeMap::new(),
    };
    Ok(search.best(0, alloc::vec![fresh; params.wallets as usize]))
}

/// `last = 0` marks a wallet that has not settled anything yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct WalletSlot {
    last: u64,
    remaining: u64,
}

struct KWalletSearch<'a> {
    txs: &'a [Transaction],
    size: u64,
    flush_period: u64,
    memo: BTreeMap<(usize, Vec<WalletSlot>), u64>,
}

impl KWalletSearch<'_> {
    fn best(&mut self, i: usize, wallets: Vec<WalletSlot>) -> u64 {
        let Some(&tx) = self.txs.get(i) else {
            return 0;
        };
        let key = (i, wallets);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let wallets = key.1.clone();
        let mut best = self.best(i + 1, wallets.clone());
        for w in 0..wallets.len() {
            if w > 0 && wallets[w] == wallets[w - 1] {
                continue;
            }
            let cur = wallets[w];
            if cur.remaining >= tx.value {
                let next = self.replace(
                    &wallets,
                    w,
                    WalletSlot {
                        last: tx.slot,
                        remaining: cur.remaining - tx.value,
                    },
                );
                best = best.max(tx.value + self.best(i + 1, next));
            }
            let restartable = cur.last != 0 && cur.last + self.flush_period < tx.slot;
            if restartable && cur.remaining < self.size {
                let next = self.replace(
                    &wallets,
                    w,
                    WalletSlot {
                        last: tx.slot,
                        remaining: self.size - tx.value,
                    },
                );
                best = best.max(tx.value + self.best(i + 1, next));
            }
        }
        self.memo.insert(key, best);
        best
    }

    fn replace(&self, wallets: &[WalletSlot], w: usize, slot: WalletSlot) -> Vec<WalletSlot> {
        let mut next = wallets.to_vec();
        next[w] = slot;
        next.sort_unstable();
        next
    }
}

/// Exact optimum of `p·V − tau·f` in the general model.
///
/// Every flush takes all committed collateral and happens right after a
/// settle; leftover committed collateral always gets one terminal flush.
pub fn opt_general_utility(
    seq: &TransactionSequence,
    params: &ModelParams,
    budget: &OracleBudget,
) -> Result<OptUtility, OracleError> {
    budget.admit(seq)?;
    params
        .validate_general()
        .map_err(|_| OracleError::InvalidParams("invalid general-model parameters"))?;
    let txs = seq.txs();
    let mut search = UtilitySearch {
        txs,
        suffix: suffix_sums(txs),
        gain: i128::from(params.p_ppm) * i128::from(params.tau_den),
        cost: i128::from(params.tau) * i128::from(PPM),
        collateral: params.collateral,
        flush_period: params.flush_period,
        chosen: Vec::new(),
        inflight: Vec::new(),
        best: None,
    };
    search.run(0, 0, 0, 0);
    let (_, value, flushes, witness) = search.best.expect("the empty schedule is always explored");
    Ok(OptUtility {
        utility: params.utility(value, flushes),
        value,
        flushes,
        witness,
    })
}

struct UtilitySearch<'a> {
    txs: &'a [Transaction],
    suffix: Vec<u64>,
    /// `p·tau_den·10^6`-scaled gain per unit of value.
    gain: i128,
    /// `tau·10^6`-scaled cost per flush.
    cost: i128,
    collateral: u64,
    flush_period: u64,
    chosen: Vec<Transaction>,
    /// `(amount, available_at)` of flushed collateral.
    inflight: Vec<(u64, u64)>,
    best: Option<(i128, u64, u64, Vec<Transaction>)>,
}

impl UtilitySearch<'_> {
    fn objective(&self, value: u64, flushes: u64) -> i128 {
        self.gain * i128::from(value) - self.cost * i128::from(flushes)
    }

    fn run(&mut self, i: usize, value: u64, committed: u64, flushes: u64) {
        let final_flushes = flushes + u64::from(committed > 0);
        let here = self.objective(value, final_flushes);
        if self.best.as_ref().is_none_or(|b| here > b.0) {
            self.best = Some((here, value, final_flushes, self.chosen.clone()));
        }
        let Some(&tx) = self.txs.get(i) else {
            return;
        };
        let bound = self.objective(value + self.suffix[i], flushes);
        if self.best.as_ref().is_some_and(|b| bound <= b.0) {
            return;
        }
        let offline: u64 = self
            .inflight
            .iter()
            .filter(|&&(_, at)| at > tx.slot)
            .map(|&(a, _)| a)
            .sum();
        if committed + offline + tx.value <= self.collateral {
            self.chosen.push(tx);
            let after = committed + tx.value;
            self.inflight.push((after, tx.slot + self.flush_period + 1));
            self.run(i + 1, value + tx.value, 0, flushes + 1);
            self.inflight.pop();
            self.run(i + 1, value + tx.value, after, flushes);
            self.chosen.pop();
        }
        self.run(i + 1, value, committed, flushes);
    }
}

/// `V·(p − tau/C)`: no schedule earns more, since each flush frees at most `C`.
pub fn opt_utility_upper_bound(value: u64, params: &ModelParams) -> Result<Rational, OracleError> {
    if !params.collateral_profitable() || params.collateral == 0 {
        return Err(OracleError::InvalidParams("requires pC > tau"));
    }
    let per_unit = params.p() - params.tau_rational() / Rational::from_integer(i128::from(params.collateral));
    Ok(per_unit * Rational::from_integer(i128::from(value)))
}

/// Upper bound on the general value optimum: slots are cut into blocks of
/// `F + 1`, each contributing at most `min(C, block total)`.
pub fn window_upper_bound(seq: &TransactionSequence, collateral: u64, flush_period: u64) -> u64 {
    let width = flush_period + 1;
    let mut total = 0;
    let mut block = None;
    let mut sum = 0;
    for tx in seq.txs() {
        let b = (tx.slot - 1) / width;
        if block != Some(b) {
            total += sum.min(collateral);
            sum = 0;
            block = Some(b);
        }
        sum += tx.value;
    }
    total + sum.min(collateral)
}
