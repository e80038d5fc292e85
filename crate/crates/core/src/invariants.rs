//! Trace checks for the structural guarantees behind the competitive bounds.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::params::ModelParams;
use crate::pool::Amount;
use crate::trace::{Event, EventKind, RunResult};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("slots {start}..={end} settle {value} > C = {collateral}")]
    Window {
        start: u64,
        end: u64,
        value: u64,
        collateral: u64,
    },
    #[error("slot {slot}: wallet {wallet} flushed with only {committed} committed (needs > C/k - T)")]
    LightFlush { slot: u64, wallet: usize, committed: u64 },
    #[error("slot {slot}: wallets {a} and {b} hold {sum} <= C/k together at a flush")]
    LightPair { slot: u64, a: usize, b: usize, sum: u64 },
    #[error("slot {slot}: flush with {total} committed in total, below C/2")]
    LightEpoch { slot: u64, total: u64 },
    #[error("slot {slot} ends with {committed} micro-units committed, not below the threshold")]
    ThresholdExceeded { slot: u64, committed: u64 },
    #[error("{flushes} flushes for settled value {value}, expected {expected}")]
    FlushCount { flushes: u64, value: u64, expected: u64 },
    #[error("run has no threshold")]
    MissingThreshold,
}

/// Every window of `F + 1` consecutive slots settles at most `C`.
pub fn check_window_bound(events: &[Event], collateral: u64, flush_period: u64) -> Result<(), Violation> {
    let settles: Vec<(u64, u64)> = events
        .iter()
        .filter(|e| e.kind == EventKind::Settle)
        .map(|e| (e.slot, e.value.unwrap_or(0)))
        .collect();
    let mut start = 0;
    let mut sum = 0;
    for &(slot, value) in &settles {
        sum += value;
        while settles[start].0 + flush_period < slot {
            sum -= settles[start].1;
            start += 1;
        }
        if sum > collateral {
            return Err(Violation::Window {
                start: slot.saturating_sub(flush_period),
                end: slot,
                value: sum,
                collateral,
            });
        }
    }
    Ok(())
}

/// Flush events issued during the run, grouped by slot; terminal cleanup
/// flushes are left out.
fn policy_flushes(result: &RunResult) -> BTreeMap<u64, Vec<(usize, u64)>> {
    let flushes: Vec<&Event> = result.flushes().collect();
    let keep = flushes.len() - result.terminal_flushes as usize;
    let mut by_slot: BTreeMap<u64, Vec<(usize, u64)>> = BTreeMap::new();
    for e in &flushes[..keep] {
        by_slot
            .entry(e.slot)
            .or_default()
            .push((e.wallet.unwrap_or(0), e.flush_amount.unwrap_or(0)));
    }
    by_slot
}

/// Every FlushWhenFull flush (other than terminal cleanup) carries more
/// than `C/k − T`.
pub fn check_fwf_flushes(result: &RunResult, params: &ModelParams) -> Result<(), Violation> {
    let floor = params.wallet_size() - params.max_value;
    for (slot, wallets) in policy_flushes(result) {
        for (wallet, committed) in wallets {
            if committed <= floor {
                return Err(Violation::LightFlush {
                    slot,
                    wallet,
                    committed,
                });
            }
        }
    }
    Ok(())
}

/// At every FlushAll flush, any two wallets hold more than `C/k` together;
/// at `r = 1` with `k > 1` the total is at least `C/2`.
pub fn check_fa_flushes(result: &RunResult, params: &ModelParams) -> Result<(), Violation> {
    let size = params.wallet_size();
    for (slot, wallets) in policy_flushes(result) {
        for (i, &(a, ca)) in wallets.iter().enumerate() {
            for &(b, cb) in &wallets[i + 1..] {
                if ca + cb <= size {
                    return Err(Violation::LightPair {
                        slot,
                        a,
                        b,
                        sum: ca + cb,
                    });
                }
            }
        }
        let total: u64 = wallets.iter().map(|&(_, c)| c).sum();
        if params.is_full_size() && params.wallets > 1 && 2 * total < params.collateral {
            return Err(Violation::LightEpoch { slot, total });
        }
    }
    Ok(())
}

/// Threshold policy: committed collateral ends every slot below `eta·C`,
/// and a run with terminal cleanup flushes exactly `ceil(V/(eta·C))` times.
pub fn check_threshold_run(result: &RunResult, params: &ModelParams) -> Result<(), Violation> {
    let eta = params.eta_ppm.ok_or(Violation::MissingThreshold)?;
    let threshold = Amount::ppm_of(params.collateral, eta).micros();
    let mut end_of_slot: BTreeMap<u64, u64> = BTreeMap::new();
    for e in &result.events {
        if let Some(c) = e.committed {
            end_of_slot.insert(e.slot, c);
        }
    }
    if let Some((&slot, &committed)) = end_of_slot.iter().find(|&(_, &c)| c >= threshold) {
        return Err(Violation::ThresholdExceeded { slot, committed });
    }
    if result.terminal_flushes > 0 || result.settled_value == 0 {
        let value = Amount::from_units(result.settled_value).micros();
        let expected = value.div_ceil(threshold);
        if result.flush_count != expected {
            return Err(Violation::FlushCount {
                flushes: result.flush_count,
                value: result.settled_value,
                expected,
            });
        }
    }
    Ok(())
}
