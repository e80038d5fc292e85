use alloc::vec::Vec;

use crate::error::{ModelError, WorkloadError};
use crate::params::ModelParams;
use crate::policy::{PolicyDecision, WalletPolicy};
use crate::sim::{RunOptions, WalletRun};
use crate::trace::RunResult;
use crate::tx::{Transaction, TransactionSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryStep {
    /// A transaction of this value in the next slot.
    Emit(u64),
    /// Leave the next slot empty.
    Gap,
    Done,
}

/// An input generator that sees each decision of the target policy before
/// choosing the next slot.
pub trait Adversary {
    /// `last` is the target's decision for the previous slot.
    fn next(&mut self, last: Option<&PolicyDecision>) -> AdversaryStep;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Micros { sent: u64 },
    Full,
    Gap { left: u64 },
    Done,
}

/// Rounds of microtransactions of size `epsilon`, one per slot, until the
/// target settles one; then a transaction of the full wallet size, then `F`
/// empty slots. A round in which nothing is settled stops after `C/epsilon`
/// microtransactions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thm3Adversary {
    wallet: u64,
    epsilon: u64,
    flush_period: u64,
    rounds: u64,
    round: u64,
    phase: Phase,
    /// `(round, settled)` for every microtransaction offered.
    log: Vec<(u64, bool)>,
}

impl Thm3Adversary {
    pub fn new(params: &ModelParams, epsilon: u64, rounds: u64) -> Result<Self, WorkloadError> {
        params.validate_kwallet()?;
        if params.wallets != 1 {
            return Err(WorkloadError::NotSingleWallet);
        }
        if epsilon == 0 || !params.collateral.is_multiple_of(epsilon) {
            return Err(WorkloadError::EpsilonDoesNotDivideC);
        }
        if params.max_value < params.collateral {
            return Err(WorkloadError::InvalidParams("the full-size transaction needs T = C"));
        }
        Ok(Thm3Adversary {
            wallet: params.collateral,
            epsilon,
            flush_period: params.flush_period,
            rounds,
            round: 0,
            phase: if rounds == 0 {
                Phase::Done
            } else {
                Phase::Micros { sent: 0 }
            },
            log: Vec::new(),
        })
    }

    pub fn rounds_done(&self) -> u64 {
        self.round
    }

    pub fn log(&self) -> &[(u64, bool)] {
        &self.log
    }
}

impl Adversary for Thm3Adversary {
    fn next(&mut self, last: Option<&PolicyDecision>) -> AdversaryStep {
        loop {
            match self.phase {
                Phase::Micros { sent } => {
                    if sent > 0 {
                        let settled = last.is_some_and(PolicyDecision::settled);
                        self.log.push((self.round, settled));
                        if settled {
                            self.phase = Phase::Full;
                            continue;
                        }
                    }
                    if sent == self.wallet / self.epsilon {
                        self.phase = Phase::Gap {
                            left: self.flush_period,
                        };
                        continue;
                    }
                    self.phase = Phase::Micros { sent: sent + 1 };
                    return AdversaryStep::Emit(self.epsilon);
                }
                Phase::Full => {
                    self.phase = Phase::Gap {
                        left: self.flush_period,
                    };
                    return AdversaryStep::Emit(self.wallet);
                }
                Phase::Gap { left: 0 } => {
                    self.round += 1;
                    self.phase = if self.round == self.rounds {
                        Phase::Done
                    } else {
                        Phase::Micros { sent: 0 }
                    };
                }
                Phase::Gap { left } => {
                    self.phase = Phase::Gap { left: left - 1 };
                    return AdversaryStep::Gap;
                }
                Phase::Done => return AdversaryStep::Done,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptiveRun {
    pub sequence: TransactionSequence,
    pub result: RunResult,
}

/// Runs `policy` against `adversary` slot by slot until the adversary is done.
pub fn run_adaptive<A: Adversary + ?Sized, P: WalletPolicy + ?Sized>(
    adversary: &mut A,
    policy: &mut P,
    params: &ModelParams,
    options: RunOptions,
) -> Result<AdaptiveRun, WorkloadError> {
    let mut run = WalletRun::new(policy, params, options)?;
    let mut sequence = TransactionSequence::default();
    let mut last = None;
    let mut slot = 0;
    loop {
        let tx = match adversary.next(last.as_ref()) {
            AdversaryStep::Done => break,
            AdversaryStep::Gap => None,
            AdversaryStep::Emit(value) => Some(Transaction::new(slot + 1, value)),
        };
        slot += 1;
        if let Some(tx) = tx {
            sequence.push(tx)?;
        }
        last = Some(run.step(slot, tx.as_ref())?);
    }
    sequence.extend_horizon(slot);
    Ok(AdaptiveRun {
        sequence,
        result: run.finish()?,
    })
}

/// Alternating microtransactions `epsilon` and full-wallet transactions
/// `C/k`, with pairs starting `ceil(F/k) + 2` slots apart so that the next
/// wallet in FlushWhenFull's cycle is back online for every micro.
pub fn fwf_killer_seq(params: &ModelParams, epsilon: u64, rounds: u64) -> Result<TransactionSequence, WorkloadError> {
    params.validate_kwallet()?;
    if !params.is_full_size() {
        return Err(WorkloadError::InvalidParams("requires r = kT/C = 1"));
    }
    let size = params.wallet_size();
    if epsilon == 0 || epsilon >= size {
        return Err(WorkloadError::InvalidParams("epsilon must lie in [1, C/k)"));
    }
    let spacing = params.flush_period.div_ceil(params.wallets) + 2;
    let txs = (0..rounds)
        .flat_map(|j| {
            let s = 1 + j * spacing;
            [Transaction::new(s, epsilon), Transaction::new(s + 1, size)]
        })
        .collect();
    Ok(TransactionSequence::from_txs(txs)?)
}

/// Epochs that saturate FlushAll and then hit its flush phase.
///
/// Each epoch: `k·floor(C/(kT))` transactions of value `T` fill every
/// wallet, one more of value `T` triggers the flush, and the next `F` slots
/// carry a burst of total `min(C, F·T)`.
pub fn epoch_burst_seq(params: &ModelParams, epochs: u64) -> Result<TransactionSequence, WorkloadError> {
    params.validate_kwallet().map_err(|e| match e {
        ModelError::InvalidParams(m) => WorkloadError::InvalidParams(m),
        other => WorkloadError::Model(other),
    })?;
    let t = params.max_value;
    let fill = params.wallets * (params.wallet_size() / t);
    let mut txs = Vec::new();
    let mut slot = 0;
    for _ in 0..epochs {
        for _ in 0..=fill {
            slot += 1;
            txs.push(Transaction::new(slot, t));
        }
        let mut burst = params.collateral.min(params.flush_period * t);
        for _ in 0..params.flush_period {
            slot += 1;
            let v = burst.min(t);
            if v > 0 {
                txs.push(Transaction::new(slot, v));
                burst -= v;
            }
        }
    }
    Ok(TransactionSequence::new(txs, slot)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{opt_general_value, OracleBudget};
    use crate::policy::{FlushAll, FlushWhenFull};
    use crate::sim::run_wallet_policy;
    use crate::wallet::WalletBankState;

    struct Refuse;

    impl WalletPolicy for Refuse {
        fn name(&self) -> &'static str {
            "refuse"
        }

        fn decide(&mut self, _: &WalletBankState, _: u64, tx: Option<&Transaction>) -> PolicyDecision {
            match tx {
                Some(_) => PolicyDecision::discard(),
                None => PolicyDecision::idle(),
            }
        }
    }

    fn single() -> ModelParams {
        ModelParams::kwallet(10, 1, 10, 2)
    }

    #[test]
    fn one_round_against_fwf() {
        let mut adv = Thm3Adversary::new(&single(), 1, 1).unwrap();
        let out = run_adaptive(&mut adv, &mut FlushWhenFull::new(), &single(), RunOptions::value_only()).unwrap();
        assert_eq!(
            out.sequence,
            TransactionSequence::new(alloc::vec![Transaction::new(1, 1), Transaction::new(2, 10)], 4).unwrap()
        );
        assert_eq!(out.result.settled_value, 1);
        let opt = opt_general_value(&out.sequence, 10, 2, &OracleBudget::default()).unwrap();
        assert_eq!(opt.value, 10);
    }

    #[test]
    fn refusing_target_gets_every_micro() {
        let mut adv = Thm3Adversary::new(&single(), 1, 1).unwrap();
        let out = run_adaptive(&mut adv, &mut Refuse, &single(), RunOptions::value_only()).unwrap();
        assert_eq!(out.sequence.len(), 10);
        assert_eq!(out.sequence.horizon(), 12);
        assert_eq!(out.result.settled_value, 0);
        let opt = opt_general_value(&out.sequence, 10, 2, &OracleBudget::default()).unwrap();
        assert_eq!(opt.value, 10);
    }

    #[test]
    fn zero_rounds_is_done() {
        let mut adv = Thm3Adversary::new(&single(), 1, 0).unwrap();
        assert_eq!(adv.next(None), AdversaryStep::Done);
    }

    #[test]
    fn adversary_guards() {
        let two = ModelParams::kwallet(20, 2, 10, 2);
        assert_eq!(Thm3Adversary::new(&two, 1, 1), Err(WorkloadError::NotSingleWallet));
        assert_eq!(
            Thm3Adversary::new(&single(), 3, 1),
            Err(WorkloadError::EpsilonDoesNotDivideC)
        );
    }

    #[test]
    fn killer_traps_fwf() {
        let params = ModelParams::kwallet(20, 2, 10, 2);
        let seq = fwf_killer_seq(&params, 1, 4).unwrap();
        let fwf = run_wallet_policy(&mut FlushWhenFull::new(), &params, &seq, RunOptions::value_only()).unwrap();
        assert_eq!(fwf.settled_value, 4);
        let opt = opt_general_value(&seq, 20, 2, &OracleBudget::default()).unwrap();
        assert!(opt.value >= 40);
        assert_eq!(fwf_killer_seq(&params, 1, 1).unwrap().len(), 2);
        assert!(fwf_killer_seq(&params, 10, 1).is_err());
        assert!(fwf_killer_seq(&ModelParams::kwallet(20, 2, 6, 2), 1, 1).is_err());
    }

    #[test]
    fn burst_epochs_hit_the_flush_phase() {
        let params = ModelParams::kwallet(20, 2, 6, 1);
        let seq = epoch_burst_seq(&params, 3).unwrap();
        // 2 fill + trigger + 1 burst slot per epoch
        assert_eq!(seq.len(), 12);
        let fa = run_wallet_policy(&mut FlushAll, &params, &seq, RunOptions::value_only()).unwrap();
        assert_eq!(fa.settled_value, 3 * 12);
        assert!(fa.settled_value >= 3 * (20 - 12));
        assert!(epoch_burst_seq(&ModelParams::kwallet(20, 2, 6, 0), 1).is_err());
    }
}
