use collateral_core::formulas::{eta_alpha, fa_ratio, ftwf_ratio, fwf_ratio, CompetitiveBound};
use collateral_core::invariants::{check_fa_flushes, check_fwf_flushes, check_threshold_run, check_window_bound};
use collateral_core::oracle::{
    feasible_window_check, opt_general_utility, opt_general_value, opt_kwallet_value, OracleBudget,
};
use collateral_core::sim::{run_pool_policy, run_wallet_policy};
use collateral_core::workload::{fwf_killer_seq, gen_stochastic, run_adaptive, Thm3Adversary, WorkloadSpec};
use collateral_core::{
    Amount, FlushAll, FlushTwoWhenFull, FlushWhenFull, ModelParams, PolicyKind, PoolState, RandomizedSingleWallet,
    Rational, RunOptions, RunResult, SeededCoins, ShadowSize, ThresholdPolicy, Transaction, TransactionSequence,
    WalletBankState, WalletPolicy,
};
use proptest::prelude::*;

fn kwallet_params() -> impl Strategy<Value = ModelParams> {
    (prop::sample::select(vec![1u64, 2, 4]), 2u64..=8, 1u64..=3)
        .prop_flat_map(|(k, size, f)| (1..=size).prop_map(move |t| ModelParams::kwallet(k * size, k, t, f)))
}

fn slots(max_value: u64, max_len: usize) -> impl Strategy<Value = TransactionSequence> {
    prop::collection::vec(prop::option::weighted(0.75, 1..=max_value), 0..=max_len)
        .prop_map(|s| TransactionSequence::from_slots(&s).unwrap())
}

fn instance(max_len: usize) -> impl Strategy<Value = (ModelParams, TransactionSequence)> {
    kwallet_params().prop_flat_map(move |p| (Just(p), slots(p.max_value, max_len)))
}

fn wallet_policies(params: &ModelParams, seed: u64) -> Vec<(PolicyKind, Box<dyn WalletPolicy>)> {
    let mut out: Vec<(PolicyKind, Box<dyn WalletPolicy>)> = vec![
        (PolicyKind::Fa, Box::new(FlushAll)),
        (PolicyKind::Fwf, Box::new(FlushWhenFull::new())),
    ];
    if params.wallets.is_multiple_of(2) {
        out.push((
            PolicyKind::Ftwf,
            Box::new(FlushTwoWhenFull::new(params.wallets).unwrap()),
        ));
    }
    if params.wallets == 1 {
        let p = RandomizedSingleWallet::new(
            params.wallet_size(),
            params.flush_period,
            ShadowSize::Full,
            SeededCoins::new(seed),
        );
        out.push((PolicyKind::Rand2, Box::new(p.unwrap())));
    }
    out
}

fn eta_params(params: &ModelParams, eta_ppm: u64) -> ModelParams {
    ModelParams::new(params.collateral, params.max_value, params.flush_period).with_eta(eta_ppm)
}

fn eta_floor(params: &ModelParams) -> u64 {
    (params.max_value * 1_000_000).div_ceil(params.collateral)
}

fn run_all(
    params: &ModelParams,
    seq: &TransactionSequence,
    seed: u64,
    options: RunOptions,
) -> Vec<(PolicyKind, RunResult)> {
    let mut out: Vec<_> = wallet_policies(params, seed)
        .into_iter()
        .map(|(kind, mut p)| (kind, run_wallet_policy(&mut p, params, seq, options).unwrap()))
        .collect();
    let eta = eta_params(params, eta_floor(params).max(500_000));
    let mut threshold = ThresholdPolicy::new(&eta).unwrap();
    out.push((
        PolicyKind::Eta,
        run_pool_policy(&mut threshold, &eta, seq, options).unwrap(),
    ));
    out
}

#[derive(Debug, Clone)]
enum PoolOp {
    Settle(u64),
    /// Flush this many thousandths of the committed collateral.
    Flush(u64),
    Idle,
}

fn pool_ops() -> impl Strategy<Value = Vec<PoolOp>> {
    prop::collection::vec(
        prop_oneof![
            (1u64..=6).prop_map(PoolOp::Settle),
            (1u64..=1000).prop_map(PoolOp::Flush),
            Just(PoolOp::Idle)
        ],
        0..40,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pool_conserves_collateral(ops in pool_ops(), c in 6u64..=20, f in 1u64..=4) {
        let mut pool = PoolState::with_capacity(c, f).unwrap();
        let cap = pool.capacity();
        for (i, op) in ops.iter().enumerate() {
            let slot = i as u64 + 1;
            pool.begin_slot(slot);
            match *op {
                PoolOp::Settle(v) if pool.fits(v, slot) => pool.settle(&Transaction::new(slot, v), slot).unwrap(),
                PoolOp::Flush(per_mille) if !pool.committed().is_zero() => {
                    let amount = Amount::from_micros((pool.committed().micros() * per_mille / 1000).max(1));
                    pool.flush(amount, slot).unwrap();
                    prop_assert_eq!(pool.offline_at(slot + f).micros() >= amount.micros(), true);
                    let back = pool.inflight().filter(|t| t.available_at == slot + f + 1).count();
                    prop_assert!(back >= 1);
                }
                _ => {}
            }
            prop_assert_eq!(pool.committed() + pool.offline_at(slot) + pool.available_at(slot), cap);
            let total = pool.inflight().fold(pool.committed(), |acc, t| acc + t.amount);
            prop_assert!(total <= cap);
        }
    }

    #[test]
    fn wallets_stay_in_bounds(ops in prop::collection::vec((0usize..4, 0u64..=6, any::<bool>()), 0..40), f in 1u64..=3) {
        let size = 6;
        let mut bank = WalletBankState::with_wallets(4, size, f).unwrap();
        let mut flushed_at: Vec<Option<u64>> = vec![None; 4];
        for (i, &(w, v, flush)) in ops.iter().enumerate() {
            let slot = i as u64 + 1;
            bank.begin_slot(slot);
            if let Some(t) = flushed_at[w] {
                let online = bank.is_available(w, slot).unwrap();
                prop_assert_eq!(online, slot > t + f);
                if slot == t + f + 1 {
                    prop_assert_eq!(bank.remaining_at(w, slot).unwrap(), size);
                }
            }
            if v > 0 && bank.fits(w, v, slot) {
                bank.settle(w, &Transaction::new(slot, v), slot).unwrap();
            }
            if flush && bank.is_available(w, slot).unwrap() {
                bank.flush(w, slot).unwrap();
                flushed_at[w] = Some(slot);
            }
            for j in 0..4 {
                prop_assert!(bank.remaining_at(j, slot).unwrap() <= size);
                prop_assert!(bank.committed(j).unwrap() <= size);
            }
        }
    }

    #[test]
    fn every_trace_respects_the_window_bound((params, seq) in instance(14), seed in any::<u64>()) {
        for (kind, r) in run_all(&params, &seq, seed, RunOptions::utility()) {
            prop_assert!(check_window_bound(&r.events, params.collateral, params.flush_period).is_ok(), "{}", kind);
            match kind {
                PolicyKind::Fa => prop_assert!(check_fa_flushes(&r, &params).is_ok()),
                PolicyKind::Fwf => prop_assert!(check_fwf_flushes(&r, &params).is_ok()),
                PolicyKind::Eta => {
                    let eta = eta_params(&params, eta_floor(&params).max(500_000));
                    prop_assert!(check_threshold_run(&r, &eta).is_ok());
                }
                _ => {}
            }
        }
    }

    #[test]
    fn runs_are_deterministic((params, seq) in instance(14), seed in any::<u64>()) {
        prop_assert_eq!(
            run_all(&params, &seq, seed, RunOptions::utility()),
            run_all(&params, &seq, seed, RunOptions::utility())
        );
    }

    #[test]
    fn decisions_depend_only_on_the_past((params, seq) in instance(14), seed in any::<u64>(), cut in 0u64..=14) {
        let cut = cut.min(seq.horizon());
        let full = run_all(&params, &seq, seed, RunOptions::value_only());
        let prefix = run_all(&params, &seq.prefix(cut), seed, RunOptions::value_only());
        for ((kind, a), (_, b)) in full.iter().zip(&prefix) {
            let early: Vec<_> = a.events.iter().filter(|e| e.slot <= cut).collect();
            prop_assert_eq!(early, b.events.iter().collect::<Vec<_>>(), "{}", kind);
        }
    }

    #[test]
    fn oracles_dominate_policies((params, seq) in instance(9)) {
        let budget = OracleBudget::default();
        let general = opt_general_value(&seq, params.collateral, params.flush_period, &budget).unwrap();
        let kwallet = opt_kwallet_value(&seq, &params, &budget).unwrap();
        prop_assert!(general.value >= kwallet);
        prop_assert!(feasible_window_check(&general.witness, params.collateral, params.flush_period));
        prop_assert_eq!(general.witness.iter().map(|t| t.value).sum::<u64>(), general.value);
        for (kind, r) in run_all(&params, &seq, 1, RunOptions::value_only()) {
            if kind == PolicyKind::Eta {
                prop_assert!(r.settled_value <= general.value);
            } else {
                prop_assert!(r.settled_value <= kwallet, "{}: {} > {}", kind, r.settled_value, kwallet);
            }
        }
    }

    #[test]
    fn appending_never_lowers_the_optimum((params, seq) in instance(8), v in 1u64..=8, gap in 1u64..=3) {
        let budget = OracleBudget::default();
        let utility = params.with_utility(100_000, 1, 2);
        let mut longer = seq.clone();
        longer.push(Transaction::new(seq.horizon() + gap, v.min(params.max_value))).unwrap();
        let (c, f) = (params.collateral, params.flush_period);
        prop_assert!(opt_general_value(&longer, c, f, &budget).unwrap().value >= opt_general_value(&seq, c, f, &budget).unwrap().value);
        prop_assert!(opt_kwallet_value(&longer, &params, &budget).unwrap() >= opt_kwallet_value(&seq, &params, &budget).unwrap());
        if utility.collateral_profitable() {
            let before = opt_general_utility(&seq, &utility, &budget).unwrap();
            let after = opt_general_utility(&longer, &utility, &budget).unwrap();
            prop_assert!(after.utility >= before.utility);
            prop_assert!(feasible_window_check(&after.witness, c, f));
        }
    }

    #[test]
    fn generated_workloads_are_well_formed(rate in 0u32..=1000, horizon in 0u64..200, seed in any::<u64>(), t in 1u64..=20) {
        let seq = gen_stochastic(&WorkloadSpec::uniform(rate, horizon, seed), t).unwrap();
        prop_assert!(seq.txs().windows(2).all(|w| w[0].slot < w[1].slot));
        prop_assert!(seq.txs().iter().all(|tx| (1..=t).contains(&tx.value) && (1..=horizon).contains(&tx.slot)));
        prop_assert_eq!(seq.horizon(), horizon);
    }

    #[test]
    fn adaptive_adversary_replays(size in 2u64..=12, f in 1u64..=3, rounds in 1u64..=4, seed in any::<u64>()) {
        let params = ModelParams::kwallet(size, 1, size, f);
        let fresh = || RandomizedSingleWallet::new(size, f, ShadowSize::Full, SeededCoins::new(seed)).unwrap();
        for adaptive_target in [true, false] {
            let mut adv = Thm3Adversary::new(&params, 1, rounds).unwrap();
            let out = if adaptive_target {
                run_adaptive(&mut adv, &mut fresh(), &params, RunOptions::value_only()).unwrap()
            } else {
                run_adaptive(&mut adv, &mut FlushWhenFull::new(), &params, RunOptions::value_only()).unwrap()
            };
            let replay = if adaptive_target {
                run_wallet_policy(&mut fresh(), &params, &out.sequence, RunOptions::value_only()).unwrap()
            } else {
                run_wallet_policy(&mut FlushWhenFull::new(), &params, &out.sequence, RunOptions::value_only()).unwrap()
            };
            prop_assert_eq!(&replay, &out.result);
        }
    }

    #[test]
    fn fwf_killer_ratio_floor(half in 2u64..=6, eps_div in 1u64..=2, f in 1u64..=3, rounds in 1u64..=5) {
        let size = 2 * half;
        let epsilon = if size % (eps_div * 2) == 0 { eps_div } else { 1 };
        let params = ModelParams::kwallet(2 * size, 2, size, f);
        let seq = fwf_killer_seq(&params, epsilon, rounds).unwrap();
        let r = run_wallet_policy(&mut FlushWhenFull::new(), &params, &seq, RunOptions::value_only()).unwrap();
        let opt = opt_general_value(&seq, params.collateral, f, &OracleBudget::with_max_transactions(10)).unwrap().value;
        prop_assert!(r.settled_value <= rounds * epsilon);
        prop_assert!(2 * epsilon * opt >= size * r.settled_value, "opt {} alg {}", opt, r.settled_value);
    }

    #[test]
    fn ratios_are_at_least_one(k in 1u64..=8, r in 0.01f64..=1.0, eta in 0.0f64..1.0, c in 10.0f64..500.0, t_frac in 0.0f64..0.5, p in 0.01f64..=1.0, tau in 0.0f64..5.0) {
        let at_least_one = |b: CompetitiveBound| b.value() >= 1.0;
        if let Ok(b) = fa_ratio(k, r) { prop_assert!(at_least_one(b)); }
        if let Ok(b) = fwf_ratio(k, r) { prop_assert!(at_least_one(b)); }
        if let Ok(b) = ftwf_ratio(k) { prop_assert!(b >= 1.0); }
        if let Ok(a) = eta_alpha(eta, c, c * t_frac, p, tau) { prop_assert!(a >= 1.0); }
    }
}

#[test]
fn utility_oracle_matches_hand_example() {
    let params = ModelParams::new(20, 6, 1).with_utility(100_000, 1, 2);
    let seq = TransactionSequence::from_values(&[6; 4]).unwrap();
    let u = opt_general_utility(&seq, &params, &OracleBudget::default()).unwrap();
    assert_eq!((u.value, u.flushes, u.utility), (24, 2, Rational::new(7, 5)));
}
