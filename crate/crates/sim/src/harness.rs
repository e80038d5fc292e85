//! Running policies and measuring them against the oracles.

use std::fmt;

use collateral_core::formulas::{
    eta_alpha, fa_ratio, ftwf_ratio, fwf_ratio, kwallet_profit_inflation, CompetitiveBound, RatioInputs,
};
use collateral_core::oracle::{
    opt_general_utility, opt_general_value, opt_kwallet_value, opt_utility_upper_bound, window_upper_bound,
    OracleBudget,
};
use collateral_core::sim::{run_pool_policy, run_wallet_policy};
use collateral_core::workload::{epoch_burst_seq, fwf_killer_seq, gen_stochastic, run_adaptive, Thm3Adversary};
use collateral_core::{
    FlushAll, FlushCostMode, FlushTwoWhenFull, FlushWhenFull, ModelParams, PolicyKind, RandomizedSingleWallet,
    Rational, RunOptions, RunResult, SeededCoins, ShadowSize, ThresholdPolicy, TransactionSequence, WalletPolicy,
};
use rayon::prelude::*;

use crate::config::{validate_policy, AdversaryKind, ExperimentConfig, OracleKind, WorkloadSource};
use crate::error::HarnessError;
use crate::io::{read_sequence_file, ResultRow};

/// One policy configured for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instance {
    pub params: ModelParams,
    pub policy: PolicyKind,
    pub shadow: ShadowSize,
    pub flush_cost: FlushCostMode,
    /// Coin seed for `rand2`.
    pub seed: u64,
}

impl Instance {
    pub fn new(params: ModelParams, policy: PolicyKind) -> Self {
        Instance {
            params,
            policy,
            shadow: ShadowSize::Full,
            flush_cost: FlushCostMode::PerWallet,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Utility runs (`tau > 0`) and the threshold policy flush leftover
    /// collateral at the end.
    pub fn options(&self) -> RunOptions {
        RunOptions {
            terminal_flush: self.params.tau > 0 || self.policy == PolicyKind::Eta,
            flush_cost: self.flush_cost,
        }
    }

    pub fn wallet_policy(&self) -> Result<Box<dyn WalletPolicy + Send>, HarnessError> {
        validate_policy(self.policy, &self.params)?;
        let p = &self.params;
        Ok(match self.policy {
            PolicyKind::Fa => Box::new(FlushAll),
            PolicyKind::Fwf => Box::new(FlushWhenFull::new()),
            PolicyKind::Ftwf => Box::new(FlushTwoWhenFull::new(p.wallets)?),
            PolicyKind::Rand2 => Box::new(RandomizedSingleWallet::new(
                p.wallet_size(),
                p.flush_period,
                self.shadow,
                SeededCoins::new(self.seed),
            )?),
            PolicyKind::Eta => return Err(HarnessError::config("eta is a pool policy")),
        })
    }

    pub fn run(&self, seq: &TransactionSequence) -> Result<RunResult, HarnessError> {
        validate_policy(self.policy, &self.params)?;
        if self.policy == PolicyKind::Eta {
            let mut policy = ThresholdPolicy::new(&self.params)?;
            return Ok(run_pool_policy(&mut policy, &self.params, seq, self.options())?);
        }
        let mut policy = self.wallet_policy()?;
        Ok(run_wallet_policy(&mut policy, &self.params, seq, self.options())?)
    }

    /// Competitive bound for this policy: on value for `tau = 0`, on
    /// utility otherwise.
    pub fn bound(&self) -> CompetitiveBound {
        let p = &self.params;
        let inputs = RatioInputs::from_params(p);
        let r = inputs.r();
        let value = match self.policy {
            PolicyKind::Fa => fa_ratio(p.wallets, r).ok(),
            PolicyKind::Fwf => fwf_ratio(p.wallets, r).ok(),
            PolicyKind::Ftwf if p.is_full_size() => ftwf_ratio(p.wallets).ok().map(CompetitiveBound::Finite),
            PolicyKind::Ftwf | PolicyKind::Rand2 => None,
            PolicyKind::Eta => {
                let eta = inputs.eta.unwrap_or(0.0);
                return eta_alpha(eta, inputs.c, inputs.t, inputs.p, inputs.tau)
                    .map_or(CompetitiveBound::Unbounded, CompetitiveBound::Finite);
            }
        };
        match value {
            Some(CompetitiveBound::Finite(v)) if p.tau > 0 => {
                kwallet_profit_inflation(p.wallets, inputs.c, inputs.t, inputs.p, inputs.tau)
                    .map_or(CompetitiveBound::Unbounded, |f| CompetitiveBound::Finite(v * f))
            }
            Some(b) => b,
            None => CompetitiveBound::Unbounded,
        }
    }
}

/// An exact ratio of two totals; `0/0` is 1 and a positive numerator over a
/// non-positive denominator is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ratio {
    Finite(Rational),
    Infinite,
}

impl Ratio {
    pub fn of(num: Rational, den: Rational) -> Self {
        let zero = Rational::from_integer(0);
        if den > zero {
            Ratio::Finite(num / den)
        } else if num <= zero {
            Ratio::Finite(Rational::from_integer(1))
        } else {
            Ratio::Infinite
        }
    }

    pub fn of_values(num: u64, den: u64) -> Self {
        Self::of(Rational::from_integer(num.into()), Rational::from_integer(den.into()))
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Ratio::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
            Ratio::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => write!(f, "{r}"),
            Ratio::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOutcome {
    pub kind: OracleKind,
    /// Optimal settled value, or an upper bound for `window-bound`.
    pub value: u64,
    /// Optimal utility (exact for `brute-utility`, otherwise the
    /// `V·(p − tau/C)` upper bound); `None` in value runs.
    pub utility: Option<Rational>,
}

pub fn run_oracle(
    kind: OracleKind,
    seq: &TransactionSequence,
    params: &ModelParams,
    budget: &OracleBudget,
) -> Result<OracleOutcome, HarnessError> {
    let (c, f) = (params.collateral, params.flush_period);
    let upper = |v| -> Result<Option<Rational>, HarnessError> {
        Ok(if params.tau > 0 {
            Some(opt_utility_upper_bound(v, params)?)
        } else {
            None
        })
    };
    let (value, utility) = match kind {
        OracleKind::BruteGeneral => {
            let v = opt_general_value(seq, c, f, budget)?.value;
            (v, upper(v)?)
        }
        OracleKind::BruteKwallet => {
            let v = opt_kwallet_value(seq, params, budget)?;
            (v, upper(v)?)
        }
        OracleKind::BruteUtility => {
            let u = opt_general_utility(seq, params, budget)?;
            (u.value, (params.tau > 0).then_some(u.utility))
        }
        OracleKind::WindowBound => {
            let v = window_upper_bound(seq, c, f);
            (v, upper(v)?)
        }
    };
    Ok(OracleOutcome { kind, value, utility })
}

/// Policy totals and, when an oracle ran, ratios and the bound check.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub run_id: String,
    pub instance: Instance,
    pub n_tx: usize,
    pub offered_value: u64,
    pub settled_value: u64,
    pub flush_count: u64,
    pub utility: Rational,
    pub opt: Option<OracleOutcome>,
    pub ratio_value: Option<Ratio>,
    pub ratio_utility: Option<Ratio>,
    pub bound: CompetitiveBound,
    pub bound_ok: Option<bool>,
}

impl RatioRow {
    fn unmeasured(run_id: String, instance: Instance, result: &RunResult) -> Self {
        RatioRow {
            run_id,
            instance,
            n_tx: result.n_tx,
            offered_value: result.offered_value,
            settled_value: result.settled_value,
            flush_count: result.flush_count,
            utility: result.utility,
            opt: None,
            ratio_value: None,
            ratio_utility: None,
            bound: instance.bound(),
            bound_ok: None,
        }
    }

    pub fn to_result_row(&self) -> ResultRow {
        let p = &self.instance.params;
        let tau = if p.tau_den == 1 {
            p.tau.to_string()
        } else {
            format!("{}/{}", p.tau, p.tau_den)
        };
        let opt_u = self.opt.and_then(|o| o.utility);
        ResultRow {
            run_id: self.run_id.clone(),
            policy: self.instance.policy.to_string(),
            c: p.collateral,
            k: p.wallets,
            t: p.max_value,
            f: p.flush_period,
            p_ppm: p.p_ppm,
            tau,
            eta_ppm: p.eta_ppm,
            seed: self.instance.seed,
            n_tx: self.n_tx,
            offered_value: self.offered_value,
            settled_value: self.settled_value,
            flush_count: self.flush_count,
            utility_num: *self.utility.numer(),
            utility_den: *self.utility.denom(),
            opt_value: self.opt.map(|o| o.value),
            opt_utility_num: opt_u.map(|u| *u.numer()),
            opt_utility_den: opt_u.map(|u| *u.denom()),
            ratio_value: self.ratio_value.map(|r| r.to_string()),
            ratio_utility: self.ratio_utility.map(|r| r.to_string()),
            bound: Some(match self.bound {
                CompetitiveBound::Finite(b) => b.to_string(),
                CompetitiveBound::Unbounded => "inf".into(),
            }),
            bound_ok: self.bound_ok,
        }
    }
}

/// Default additive allowance: 0 on value, `pC + tau` on utility.
pub fn default_slack(params: &ModelParams) -> Rational {
    if params.tau > 0 {
        params.p() * Rational::from_integer(params.collateral.into()) + params.tau_rational()
    } else {
        Rational::from_integer(0)
    }
}

/// `opt <= bound·alg + slack`, with `1e-9` tolerance for the float bound.
pub fn within_bound(opt: Rational, alg: Rational, bound: CompetitiveBound, slack: Rational) -> bool {
    match bound {
        CompetitiveBound::Unbounded => true,
        CompetitiveBound::Finite(b) => {
            let f = |r: Rational| *r.numer() as f64 / *r.denom() as f64;
            f(opt) <= b * f(alg) + f(slack) + 1e-9
        }
    }
}

/// Runs `instance` and the oracle on `seq` and compares them.
pub fn measure(
    run_id: String,
    instance: &Instance,
    seq: &TransactionSequence,
    oracle: OracleKind,
    budget: &OracleBudget,
    slack: Option<Rational>,
) -> Result<(RunResult, RatioRow), HarnessError> {
    let result = instance.run(seq)?;
    let row = compare(run_id, instance, &result, seq, oracle, budget, slack)?;
    Ok((result, row))
}

fn compare(
    run_id: String,
    instance: &Instance,
    result: &RunResult,
    seq: &TransactionSequence,
    oracle: OracleKind,
    budget: &OracleBudget,
    slack: Option<Rational>,
) -> Result<RatioRow, HarnessError> {
    let params = &instance.params;
    let opt = run_oracle(oracle, seq, params, budget)?;
    let mut row = RatioRow::unmeasured(run_id, *instance, result);
    let slack = slack.unwrap_or_else(|| default_slack(params));
    let v = |x: u64| Rational::from_integer(x.into());
    row.ratio_value = Some(Ratio::of_values(opt.value, result.settled_value));
    row.ratio_utility = opt.utility.map(|u| Ratio::of(u, result.utility));
    row.bound_ok = Some(match opt.utility {
        Some(u) => within_bound(u, result.utility, row.bound, slack),
        None => within_bound(v(opt.value), v(result.settled_value), row.bound, slack),
    });
    row.opt = Some(opt);
    Ok(row)
}

/// One repetition of a configured experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub repetition: u64,
    pub sequence: TransactionSequence,
    pub result: RunResult,
    pub row: RatioRow,
}

/// Runs repetition `rep`: derived seeds are `seed + rep` for the coins and
/// `workload.seed + rep` for generated workloads.
pub fn run_repetition(config: &ExperimentConfig, rep: u64) -> Result<RunRecord, HarnessError> {
    config.validate()?;
    let instance = Instance {
        params: config.params,
        policy: config.policy,
        shadow: config.shadow,
        flush_cost: config.flush_cost,
        seed: config.seed.wrapping_add(rep),
    };
    let params = &config.params;
    let (sequence, result) = match &config.workload {
        WorkloadSource::Generate(spec) => {
            let seq = gen_stochastic(&spec.with_seed(spec.seed.wrapping_add(rep)), params.max_value)?;
            let r = instance.run(&seq)?;
            (seq, r)
        }
        WorkloadSource::Sequence(path) => {
            let seq = read_sequence_file(path)?;
            let r = instance.run(&seq)?;
            (seq, r)
        }
        WorkloadSource::Adversary(adv) => match adv.kind {
            AdversaryKind::Thm3 => {
                let mut session = Thm3Adversary::new(params, adv.epsilon, adv.rounds)?;
                let mut policy = instance.wallet_policy()?;
                let out = run_adaptive(&mut session, &mut policy, params, instance.options())?;
                (out.sequence, out.result)
            }
            AdversaryKind::Fwfkiller => {
                let seq = fwf_killer_seq(params, adv.epsilon, adv.rounds)?;
                let r = instance.run(&seq)?;
                (seq, r)
            }
            AdversaryKind::Burst => {
                let seq = epoch_burst_seq(params, adv.rounds)?;
                let r = instance.run(&seq)?;
                (seq, r)
            }
        },
    };
    let run_id = rep.to_string();
    let row = match config.oracle {
        Some(oracle) => {
            let budget = OracleBudget::with_max_transactions(config.max_transactions);
            compare(run_id, &instance, &result, &sequence, oracle, &budget, config.slack)?
        }
        None => RatioRow::unmeasured(run_id, instance, &result),
    };
    Ok(RunRecord {
        repetition: rep,
        sequence,
        result,
        row,
    })
}

/// All repetitions, in parallel, returned in repetition order.
pub fn run_config(config: &ExperimentConfig) -> Result<Vec<RunRecord>, HarnessError> {
    config.validate()?;
    (0..config.repetitions)
        .into_par_iter()
        .map(|rep| run_repetition(config, rep))
        .collect()
}

/// The first repetition of `config`.
pub fn run_policy(config: &ExperimentConfig) -> Result<RunRecord, HarnessError> {
    run_repetition(config, 0)
}

/// Ratio rows for every repetition; the oracle defaults to `brute-general`.
pub fn measure_ratio(config: &ExperimentConfig) -> Result<Vec<RatioRow>, HarnessError> {
    let mut config = config.clone();
    config.oracle.get_or_insert(OracleKind::BruteGeneral);
    Ok(run_config(&config)?.into_iter().map(|r| r.row).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use collateral_core::workload::WorkloadSpec;

    fn constant_six(n: u64) -> WorkloadSource {
        WorkloadSource::Generate(WorkloadSpec::constant(6, 1000, n, 0))
    }

    #[test]
    fn fwf_constant_six() {
        let config = ExperimentConfig::new(ModelParams::kwallet(20, 2, 6, 1), PolicyKind::Fwf, constant_six(5));
        let r = run_policy(&config).unwrap();
        assert_eq!((r.result.settled_value, r.result.flush_count), (18, 2));
    }

    #[test]
    fn threshold_constant_six() {
        let params = ModelParams::new(20, 6, 1).with_utility(100_000, 1, 2).with_eta(500_000);
        let config = ExperimentConfig::new(params, PolicyKind::Eta, constant_six(4));
        let r = run_policy(&config).unwrap();
        assert_eq!((r.result.settled_value, r.result.flush_count), (24, 3));
        assert_eq!(r.result.utility, Rational::new(9, 10));
    }

    #[test]
    fn empty_workload() {
        let config = ExperimentConfig::new(
            ModelParams::kwallet(20, 2, 6, 1),
            PolicyKind::Fa,
            WorkloadSource::Generate(WorkloadSpec::uniform(0, 10, 0)),
        );
        let rows = measure_ratio(&config).unwrap();
        assert_eq!(rows[0].settled_value, 0);
        assert_eq!(rows[0].ratio_value, Some(Ratio::Finite(Rational::from_integer(1))));
        assert_eq!(rows[0].bound_ok, Some(true));
    }

    #[test]
    fn ratios_on_constant_six() {
        let params = ModelParams::kwallet(20, 2, 6, 1);
        for policy in [PolicyKind::Fwf, PolicyKind::Fa] {
            let rows = measure_ratio(&ExperimentConfig::new(params, policy, constant_six(5))).unwrap();
            assert_eq!(rows[0].opt.unwrap().value, 30);
            assert_eq!(rows[0].ratio_value, Some(Ratio::Finite(Rational::new(5, 3))));
            assert_eq!(rows[0].bound_ok, Some(true));
        }
        let fwf = Instance::new(params, PolicyKind::Fwf).bound().value();
        assert!((fwf - 3.75).abs() < 1e-12);
        let fa = Instance::new(params, PolicyKind::Fa).bound().value();
        assert!((fa - 3.5).abs() < 1e-12);
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(Ratio::of_values(0, 0), Ratio::Finite(Rational::from_integer(1)));
        assert_eq!(Ratio::of_values(3, 0), Ratio::Infinite);
        assert_eq!(Ratio::of_values(30, 18).to_string(), "5/3");
    }

    #[test]
    fn repetitions_are_deterministic() {
        let mut config = ExperimentConfig::new(
            ModelParams::kwallet(10, 1, 10, 2),
            PolicyKind::Rand2,
            WorkloadSource::Generate(WorkloadSpec::uniform(700, 40, 5)),
        );
        config.repetitions = 4;
        let a = run_config(&config).unwrap();
        let b = run_config(&config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|r| r.repetition).collect::<Vec<_>>(), [0, 1, 2, 3]);
    }
}
