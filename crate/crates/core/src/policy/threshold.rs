use super::{Action, Flushes, PolicyDecision, Target};
use crate::error::ModelError;
use crate::params::ModelParams;
use crate::pool::{Amount, PoolState};
use crate::tx::Transaction;

/// Threshold policy over the pool: settle whenever the available collateral
/// covers the transaction, then flush exactly `eta·C` whenever the committed
/// collateral has reached `eta·C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdPolicy {
    threshold: Amount,
}

impl ThresholdPolicy {
    pub fn new(params: &ModelParams) -> Result<Self, ModelError> {
        let eta = params.validate_eta()?;
        Ok(ThresholdPolicy {
            threshold: Amount::ppm_of(params.collateral, eta),
        })
    }

    /// `eta·C`.
    pub fn threshold(&self) -> Amount {
        self.threshold
    }

    pub fn decide(&mut self, pool: &PoolState, slot: u64, tx: Option<&Transaction>) -> PolicyDecision {
        let Some(tx) = tx else {
            return PolicyDecision::idle();
        };
        if !pool.fits(tx.value, slot) {
            return PolicyDecision::discard();
        }
        let committed = pool.committed() + Amount::from_units(tx.value);
        let mut flushed = Amount::ZERO;
        // T <= eta·C, so this runs at most once per settle.
        while committed - flushed >= self.threshold {
            flushed += self.threshold;
        }
        let flushes = if flushed.is_zero() {
            Flushes::None
        } else {
            Flushes::Pool(flushed)
        };
        PolicyDecision {
            action: Action::Settle(Target::Pool),
            flushes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{sim, Rational, RunOptions, TransactionSequence};
    use alloc::vec::Vec;

    fn params() -> ModelParams {
        ModelParams::new(20, 6, 1).with_utility(100_000, 1, 2).with_eta(500_000)
    }

    #[test]
    fn hand_trace_eta_half() {
        let seq = TransactionSequence::from_values(&[6, 6, 6, 6]).unwrap();
        let mut p = ThresholdPolicy::new(&params()).unwrap();
        let r = sim::run_pool_policy(&mut p, &params(), &seq, RunOptions::utility()).unwrap();
        assert_eq!(r.settled_value, 24);
        let flushes: Vec<(u64, u64)> = r.flushes().map(|e| (e.slot, e.flush_amount.unwrap())).collect();
        assert_eq!(flushes, [(2, 10_000_000), (4, 10_000_000), (4, 4_000_000)]);
        assert_eq!(r.flush_count, 3);
        assert_eq!(r.terminal_flushes, 1);
        // 0.1 * 24 - 0.5 * 3
        assert_eq!(r.utility, Rational::new(9, 10));
    }

    #[test]
    fn eta_below_floor_rejected() {
        let bad = ModelParams::new(20, 6, 1).with_eta(250_000);
        assert_eq!(ThresholdPolicy::new(&bad), Err(ModelError::InvalidEta));
    }

    #[test]
    fn eta_one_flushes_only_when_full() {
        let p = ModelParams::new(12, 6, 1).with_eta(1_000_000);
        let seq = TransactionSequence::from_values(&[6, 5, 1, 6]).unwrap();
        let mut pol = ThresholdPolicy::new(&p).unwrap();
        let r = sim::run_pool_policy(&mut pol, &p, &seq, RunOptions::utility()).unwrap();
        let mid: Vec<u64> = r.flushes().map(|e| e.slot).collect();
        // full at slot 3 (6 + 5 + 1 = 12); slot 4 is in the flush period
        assert_eq!(mid, [3]);
        assert_eq!(r.settled_value, 12);
    }
}
