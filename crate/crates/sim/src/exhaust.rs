//! Exhaustive bound checks over every short sequence.

use collateral_core::formulas::{fa_bound_exact, ftwf_bound_exact, fwf_bound_exact};
use collateral_core::invariants::{check_fa_flushes, check_fwf_flushes, check_window_bound, Violation};
use collateral_core::oracle::{opt_general_value, OracleBudget};
use collateral_core::sim::run_wallet_policy;
use collateral_core::{
    FlushAll, FlushTwoWhenFull, FlushWhenFull, ModelParams, PolicyKind, Rational, RunOptions, RunResult,
    TransactionSequence, WalletPolicy,
};
use rayon::prelude::*;

use crate::error::HarnessError;
use crate::harness::Ratio;

/// Default cap on the number of enumerated sequences.
pub const DEFAULT_BUDGET: u64 = 78_125;

/// Every sequence of at most `max_len` slots, each slot empty or holding
/// one value from `values`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhaustSpace {
    pub params: ModelParams,
    pub max_len: u64,
    pub values: Vec<u64>,
    /// Most sequences to enumerate.
    pub budget: u64,
}

impl ExhaustSpace {
    pub fn new(params: ModelParams, max_len: u64, values: Vec<u64>) -> Self {
        ExhaustSpace {
            params,
            max_len,
            values,
            budget: DEFAULT_BUDGET,
        }
    }

    /// Number of sequences of length `1..=max_len`.
    pub fn size(&self) -> Option<u64> {
        let base = self.values.len() as u64 + 1;
        (1..=u32::try_from(self.max_len).ok()?).try_fold(0u64, |acc, n| acc.checked_add(base.checked_pow(n)?))
    }

    fn sequence(&self, len: u64, mut code: u64) -> TransactionSequence {
        let base = self.values.len() as u64 + 1;
        let slots: Vec<Option<u64>> = (0..len)
            .map(|_| {
                let digit = code % base;
                code /= base;
                digit.checked_sub(1).map(|i| self.values[i as usize])
            })
            .collect();
        TransactionSequence::from_slots(&slots).expect("slots are in order")
    }

    fn sequences(&self) -> impl ParallelIterator<Item = TransactionSequence> + '_ {
        let base = self.values.len() as u64 + 1;
        (1..=self.max_len)
            .into_par_iter()
            .flat_map(move |len| (0..base.pow(len as u32)).into_par_iter().map(move |code| (len, code)))
            .map(move |(len, code)| self.sequence(len, code))
    }

    /// Policies with a bound to check here and that bound.
    pub fn checked_policies(&self) -> Vec<(PolicyKind, Rational)> {
        let p = &self.params;
        let mut out = Vec::new();
        if let Some(b) = fa_bound_exact(p) {
            out.push((PolicyKind::Fa, b));
        }
        if let Some(b) = fwf_bound_exact(p) {
            out.push((PolicyKind::Fwf, b));
        }
        if p.is_full_size() {
            if let Some(b) = ftwf_bound_exact(p) {
                out.push((PolicyKind::Ftwf, b));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub policy: PolicyKind,
    pub sequence: TransactionSequence,
    pub opt: u64,
    pub settled: u64,
    pub bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantFailure {
    pub policy: PolicyKind,
    pub sequence: TransactionSequence,
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicySummary {
    pub policy: PolicyKind,
    pub bound: Rational,
    pub worst: Ratio,
    /// First sequence (in enumeration order) reaching `worst`.
    pub worst_sequence: TransactionSequence,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExhaustSummary {
    pub sequences: u64,
    pub policies: Vec<PolicySummary>,
    pub counterexamples: Vec<Counterexample>,
    pub violations: Vec<InvariantFailure>,
}

impl ExhaustSummary {
    pub fn is_clean(&self) -> bool {
        self.counterexamples.is_empty() && self.violations.is_empty()
    }
}

fn policy_for(kind: PolicyKind, params: &ModelParams) -> Result<Box<dyn WalletPolicy + Send>, HarnessError> {
    Ok(match kind {
        PolicyKind::Fa => Box::new(FlushAll),
        PolicyKind::Fwf => Box::new(FlushWhenFull::new()),
        PolicyKind::Ftwf => Box::new(FlushTwoWhenFull::new(params.wallets)?),
        other => return Err(HarnessError::config(format!("{other} is not checked exhaustively"))),
    })
}

fn invariants(kind: PolicyKind, result: &RunResult, params: &ModelParams) -> Result<(), Violation> {
    check_window_bound(&result.events, params.collateral, params.flush_period)?;
    match kind {
        PolicyKind::Fa => check_fa_flushes(result, params),
        PolicyKind::Fwf => check_fwf_flushes(result, params),
        _ => Ok(()),
    }
}

struct Outcome {
    ratios: Vec<Ratio>,
    counterexamples: Vec<Counterexample>,
    violations: Vec<InvariantFailure>,
}

/// Runs FA, FWF and (at `r = 1`) FTWF on every sequence in `space` and
/// compares each against the exact general optimum with zero slack.
/// Shorter sequences are enumerated too, so every prefix is covered.
pub fn exhaustive_verify(space: &ExhaustSpace) -> Result<ExhaustSummary, HarnessError> {
    let params = &space.params;
    params.validate_kwallet()?;
    if space.values.is_empty() {
        return Err(HarnessError::config("value set is empty"));
    }
    if let Some(&v) = space.values.iter().find(|&&v| v == 0 || v > params.max_value) {
        return Err(HarnessError::config(format!("value {v} outside 1..=T")));
    }
    let total = space
        .size()
        .filter(|&n| n <= space.budget)
        .ok_or_else(|| HarnessError::config(format!("more than {} sequences; raise the budget", space.budget)))?;
    let checked = space.checked_policies();
    if checked.is_empty() {
        return Err(HarnessError::config(
            "no policy has a finite bound for these parameters",
        ));
    }
    let budget = OracleBudget::with_max_transactions(space.max_len as usize);

    let outcomes: Vec<(TransactionSequence, Outcome)> = space
        .sequences()
        .map(|seq| -> Result<_, HarnessError> {
            let opt = opt_general_value(&seq, params.collateral, params.flush_period, &budget)?.value;
            let mut out = Outcome {
                ratios: Vec::with_capacity(checked.len()),
                counterexamples: Vec::new(),
                violations: Vec::new(),
            };
            for &(kind, bound) in &checked {
                let mut policy = policy_for(kind, params)?;
                let result = run_wallet_policy(&mut policy, params, &seq, RunOptions::value_only())?;
                let settled = result.settled_value;
                out.ratios.push(Ratio::of_values(opt, settled));
                let lhs = Rational::from_integer(opt.into());
                if lhs > bound * Rational::from_integer(settled.into()) {
                    out.counterexamples.push(Counterexample {
                        policy: kind,
                        sequence: seq.clone(),
                        opt,
                        settled,
                        bound,
                    });
                }
                if let Err(violation) = invariants(kind, &result, params) {
                    out.violations.push(InvariantFailure {
                        policy: kind,
                        sequence: seq.clone(),
                        violation,
                    });
                }
            }
            Ok((seq, out))
        })
        .collect::<Result<_, _>>()?;

    let mut summary = ExhaustSummary {
        sequences: total,
        ..Default::default()
    };
    summary.policies = checked
        .iter()
        .map(|&(policy, bound)| PolicySummary {
            policy,
            bound,
            worst: Ratio::Finite(Rational::from_integer(0)),
            worst_sequence: TransactionSequence::default(),
        })
        .collect();
    for (seq, out) in outcomes {
        for (s, ratio) in summary.policies.iter_mut().zip(out.ratios) {
            if worse(ratio, s.worst) {
                s.worst = ratio;
                s.worst_sequence = seq.clone();
            }
        }
        summary.counterexamples.extend(out.counterexamples);
        summary.violations.extend(out.violations);
    }
    Ok(summary)
}

fn worse(a: Ratio, b: Ratio) -> bool {
    match (a, b) {
        (Ratio::Infinite, Ratio::Infinite) => false,
        (Ratio::Infinite, _) => true,
        (_, Ratio::Infinite) => false,
        (Ratio::Finite(x), Ratio::Finite(y)) => x > y,
    }
}
