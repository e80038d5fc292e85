use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use collateral_core::formulas::{
    eta_alpha, eta_star, eta_star_ratio, fa_ratio, ftwf_ratio, fwf_ratio, k_star, kwallet_profit_inflation,
    CompetitiveBound, RatioInputs,
};
use collateral_core::workload::WorkloadSpec;
use collateral_core::{FlushCostMode, FormulaError, ModelParams, PolicyKind, Rational, ShadowSize};
use collateral_sim::exhaust::{exhaustive_verify, ExhaustSpace, DEFAULT_BUDGET};
use collateral_sim::io::{write_results, write_results_file, write_sequence_file, write_trace_file};
use collateral_sim::sweep::{sweep, SweepParam, SweepRange};
use collateral_sim::{
    run_config, AdversaryKind, AdversarySpec, ExperimentConfig, OracleKind, RunRecord, WorkloadSource,
};
use serde_json::{json, Value};

/// Online collateral-maintenance policies: simulation, ratio measurement and
/// bound checks.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a policy on a workload and print the results CSV.
    Simulate(RunArgs),
    /// Run a policy and an offline oracle and compare them.
    Ratio {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Run a policy against an adversarial sequence.
    Adversary(AdversaryArgs),
    /// Check the competitive bounds on every short sequence.
    Exhaust(ExhaustArgs),
    /// Sweep `eta` or `k` and compare with the formula optimum.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        param: SweepParam,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
        /// Oracle for the worst-ratio column.
        #[arg(long)]
        oracle: Option<OracleKind>,
        #[arg(long = "max-tx", default_value_t = 12)]
        max_tx: usize,
    },
    /// Print the closed-form bounds and optima as JSON.
    Formulas(FormulaArgs),
}

#[derive(Args, Clone)]
struct ParamArgs {
    #[arg(long = "C")]
    c: Option<u64>,
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[arg(long = "T")]
    t: Option<u64>,
    #[arg(long = "F")]
    f: Option<u64>,
    #[arg(long = "eta-ppm")]
    eta_ppm: Option<u64>,
    #[arg(long = "p-ppm", default_value_t = 1_000_000)]
    p_ppm: u64,
    #[arg(long, default_value_t = 0)]
    tau: u64,
    /// Denominator of the flush cost (`tau / tau-den`).
    #[arg(long = "tau-den", default_value_t = 1)]
    tau_den: u64,
}

impl ParamArgs {
    fn params(&self) -> Result<ModelParams> {
        let (Some(c), Some(t), Some(f)) = (self.c, self.t, self.f) else {
            bail!("--C, --T and --F are required without --config");
        };
        let mut p = ModelParams::kwallet(c, self.k, t, f).with_utility(self.p_ppm, self.tau, self.tau_den);
        p.eta_ppm = self.eta_ppm;
        Ok(p)
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON experiment config; other run flags are then ignored except
    /// the output paths.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    policy: Option<PolicyKind>,
    #[command(flatten)]
    params: ParamArgs,
    /// Workload spec as inline JSON or a path to a JSON file.
    #[arg(long, conflicts_with = "seq")]
    workload: Option<String>,
    /// Sequence CSV (`slot,value`).
    #[arg(long)]
    seq: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repetitions: u64,
    #[arg(long, value_parser = parse_shadow, default_value = "full")]
    shadow: ShadowSize,
    #[arg(long = "flush-cost", value_parser = parse_flush_cost, default_value = "per-wallet")]
    flush_cost: FlushCostMode,
    /// NDJSON event trace (`-<rep>` is appended with several repetitions).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Results CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct OracleArgs {
    #[arg(long, default_value = "brute-general")]
    oracle: OracleKind,
    /// Oracle transaction budget.
    #[arg(long = "max-tx", default_value_t = 12)]
    max_tx: usize,
    /// Additive allowance in the bound check, e.g. `5/2`.
    #[arg(long, value_parser = parse_rational)]
    slack: Option<Rational>,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long = "type")]
    kind: AdversaryKind,
    /// Policy under attack.
    #[arg(long)]
    target: PolicyKind,
    #[arg(long, default_value_t = 1)]
    epsilon: u64,
    #[arg(long)]
    rounds: u64,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "brute-general")]
    oracle: OracleKind,
    #[arg(long = "max-tx", default_value_t = 24)]
    max_tx: usize,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the generated sequence as CSV.
    #[arg(long = "save-seq")]
    save_seq: Option<PathBuf>,
}

#[derive(Args)]
struct ExhaustArgs {
    #[arg(long = "C")]
    c: u64,
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[arg(long = "T")]
    t: u64,
    #[arg(long = "F")]
    f: u64,
    #[arg(long = "max-len")]
    max_len: u64,
    /// Comma-separated transaction values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<u64>,
    /// Most sequences to enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct FormulaArgs {
    #[arg(long = "C")]
    c: u64,
    #[arg(long = "T")]
    t: u64,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long = "p-ppm", default_value_t = 1_000_000)]
    p_ppm: u64,
    #[arg(long, default_value_t = 0)]
    tau: u64,
    #[arg(long = "tau-den", default_value_t = 1)]
    tau_den: u64,
    #[arg(long = "eta-ppm")]
    eta_ppm: Option<u64>,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse()
        .map_err(|_| format!("expected an integer or a fraction like 5/2, got {s:?}"))
}

fn parse_shadow(s: &str) -> Result<ShadowSize, String> {
    match s {
        "full" => Ok(ShadowSize::Full),
        "half" => Ok(ShadowSize::Half),
        _ => Err("expected full or half".into()),
    }
}

fn parse_flush_cost(s: &str) -> Result<FlushCostMode, String> {
    match s {
        "per-wallet" => Ok(FlushCostMode::PerWallet),
        "per-action" => Ok(FlushCostMode::PerAction),
        _ => Err("expected per-wallet or per-action".into()),
    }
}

fn load_workload(arg: &str) -> Result<WorkloadSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_owned()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading workload {arg}"))?
    };
    serde_json::from_str(&text).context("parsing workload spec")
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => {
                let policy = self.policy.context("--policy is required without --config")?;
                let workload = match (&self.workload, &self.seq) {
                    (Some(w), None) => WorkloadSource::Generate(load_workload(w)?),
                    (None, Some(path)) => WorkloadSource::Sequence(path.clone()),
                    _ => bail!("give exactly one of --workload and --seq"),
                };
                let mut c = ExperimentConfig::new(self.params.params()?, policy, workload);
                c.seed = self.seed;
                c.repetitions = self.repetitions;
                c.shadow = self.shadow;
                c.flush_cost = self.flush_cost;
                c
            }
        };
        if self.csv.is_some() {
            config.output.csv = self.csv.clone();
        }
        if self.trace.is_some() {
            config.output.trace = self.trace.clone();
        }
        config.validate()?;
        Ok(config)
    }
}

fn trace_path(base: &Path, rep: u64, reps: u64) -> PathBuf {
    if reps == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().unwrap_or_default().to_string_lossy();
    let name = match base.extension() {
        Some(ext) => format!("{stem}-{rep}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{rep}"),
    };
    base.with_file_name(name)
}

/// Writes traces and the results CSV, and prints the results to stdout.
fn emit(config: &ExperimentConfig, records: &[RunRecord]) -> Result<()> {
    if let Some(base) = &config.output.trace {
        for r in records {
            write_trace_file(&trace_path(base, r.repetition, config.repetitions), &r.result.events)?;
        }
    }
    let rows: Vec<_> = records.iter().map(|r| r.row.to_result_row()).collect();
    if let Some(path) = &config.output.csv {
        write_results_file(path, &rows)?;
    }
    write_results(io::stdout().lock(), &rows)?;
    Ok(())
}

fn run(config: &ExperimentConfig) -> Result<()> {
    let records = run_config(config)?;
    emit(config, &records)
}

fn adversary(args: AdversaryArgs) -> Result<()> {
    let spec = AdversarySpec {
        kind: args.kind,
        epsilon: args.epsilon,
        rounds: args.rounds,
    };
    let mut config = ExperimentConfig::new(args.params.params()?, args.target, WorkloadSource::Adversary(spec));
    config.seed = args.seed;
    config.oracle = Some(args.oracle);
    config.max_transactions = args.max_tx;
    config.output.csv = args.csv;
    config.output.trace = args.trace;
    config.validate()?;
    let records = run_config(&config)?;
    if let Some(path) = &args.save_seq {
        write_sequence_file(path, &records[0].sequence)?;
    }
    emit(&config, &records)
}

fn exhaust(args: ExhaustArgs) -> Result<ExitCode> {
    let mut space = ExhaustSpace::new(
        ModelParams::kwallet(args.c, args.k, args.t, args.f),
        args.max_len,
        args.values,
    );
    space.budget = args.budget;
    let summary = exhaustive_verify(&space)?;
    let mut out = io::stdout().lock();
    writeln!(out, "sequences: {}", summary.sequences)?;
    for p in &summary.policies {
        writeln!(
            out,
            "{}: bound {}, worst ratio {} on {:?}",
            p.policy,
            p.bound,
            p.worst,
            p.worst_sequence
                .txs()
                .iter()
                .map(|t| (t.slot, t.value))
                .collect::<Vec<_>>()
        )?;
    }
    for c in &summary.counterexamples {
        let txs: Vec<_> = c.sequence.txs().iter().map(|t| (t.slot, t.value)).collect();
        writeln!(
            out,
            "counterexample {}: OPT {} > {} * {} on {txs:?}",
            c.policy, c.opt, c.bound, c.settled
        )?;
    }
    for v in &summary.violations {
        let txs: Vec<_> = v.sequence.txs().iter().map(|t| (t.slot, t.value)).collect();
        writeln!(out, "invariant {}: {} on {txs:?}", v.policy, v.violation)?;
    }
    writeln!(
        out,
        "{} counterexamples, {} invariant violations",
        summary.counterexamples.len(),
        summary.violations.len()
    )?;
    Ok(if summary.is_clean() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn sweep_cmd(
    run: RunArgs,
    param: SweepParam,
    range: SweepRange,
    oracle: Option<OracleKind>,
    max_tx: usize,
) -> Result<()> {
    let mut config = run.config()?;
    if oracle.is_some() {
        config.oracle = oracle;
        config.max_transactions = max_tx;
    }
    let table = sweep(&config, param, range)?;
    let nearest = |target: Option<f64>| {
        target.and_then(|t| {
            table
                .rows
                .iter()
                .min_by(|a, b| (a.value - t).abs().total_cmp(&(b.value - t).abs()))
                .map(|r| r.value)
        })
    };
    let formula_row = nearest(table.formula_best);
    let mut wtr = csv::Writer::from_writer(io::stdout().lock());
    wtr.write_record([
        &*param.to_string(),
        "mean_value",
        "mean_flushes",
        "mean_utility",
        "worst_ratio",
        "bound",
        "marker",
    ])?;
    for r in &table.rows {
        let mut marks = Vec::new();
        if Some(r.value) == formula_row {
            marks.push("formula");
        }
        if Some(r.value) == table.empirical_best {
            marks.push("empirical");
        }
        wtr.write_record([
            format!("{}", r.value),
            format!("{:.4}", r.mean_value),
            format!("{:.4}", r.mean_flushes),
            format!("{:.6}", r.mean_utility),
            r.worst_ratio.map(|x| x.to_string()).unwrap_or_default(),
            bound_str(r.bound),
            marks.join("+"),
        ])?;
    }
    wtr.flush()?;
    for (v, why) in &table.skipped {
        eprintln!("skipped {param} = {v}: {why}");
    }
    if let Some(b) = table.formula_best {
        eprintln!("formula optimum {param} = {b:.6}");
    }
    if let Some(b) = table.empirical_best {
        eprintln!("empirical best {param} = {b}");
    }
    Ok(())
}

fn bound_str(b: CompetitiveBound) -> String {
    match b {
        CompetitiveBound::Finite(v) => format!("{v:.6}"),
        CompetitiveBound::Unbounded => "inf".into(),
    }
}

fn bound_json(b: Result<CompetitiveBound, FormulaError>) -> Value {
    match b {
        Ok(CompetitiveBound::Finite(v)) => json!(v),
        Ok(CompetitiveBound::Unbounded) => json!("unbounded"),
        Err(_) => Value::Null,
    }
}

fn formulas(args: FormulaArgs) -> Value {
    let mut params =
        ModelParams::kwallet(args.c, args.k.unwrap_or(1), args.t, 1).with_utility(args.p_ppm, args.tau, args.tau_den);
    params.eta_ppm = args.eta_ppm;
    let x = RatioInputs::from_params(&params);
    let (c, t, p, tau) = (x.c, x.t, x.p, x.tau);
    let mut out = json!({
        "C": args.c,
        "T": args.t,
        "p": p,
        "tau": tau,
        "beta": if c > 0.0 && p > 0.0 { json!(x.beta()) } else { Value::Null },
        "k_star": k_star(c, t).map_or(Value::Null, |k| json!({"real": k.real, "integer": k.integer})),
        "eta_star": eta_star(c, t, p, tau).map_or(Value::Null, |e| json!({"eta": e.eta, "unclamped": e.unclamped, "clamped": e.clamped})),
        "eta_star_ratio": eta_star_ratio(c, t, p, tau).map_or(Value::Null, |v| json!(v)),
    });
    if let Some(k) = args.k {
        let r = x.r();
        out["k"] = json!(k);
        out["r"] = json!(r);
        out["fa_ratio"] = bound_json(fa_ratio(k, r));
        out["fwf_ratio"] = bound_json(fwf_ratio(k, r));
        out["ftwf_ratio"] = ftwf_ratio(k).map_or(Value::Null, |v| json!(v));
        out["kwallet_profit_inflation"] = kwallet_profit_inflation(k, c, t, p, tau).map_or(Value::Null, |v| json!(v));
    }
    if let Some(eta) = x.eta {
        out["eta"] = json!(eta);
        out["eta_alpha"] = eta_alpha(eta, c, t, p, tau).map_or(Value::Null, |v| json!(v));
    }
    out
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Simulate(run_args) => run(&run_args.config()?)?,
        Command::Ratio { run: run_args, oracle } => {
            let mut config = run_args.config()?;
            config.oracle = Some(oracle.oracle);
            config.max_transactions = oracle.max_tx;
            if oracle.slack.is_some() {
                config.slack = oracle.slack;
            }
            run(&config)?
        }
        Command::Adversary(args) => adversary(args)?,
        Command::Exhaust(args) => return exhaust(args),
        Command::Sweep {
            run,
            param,
            from,
            to,
            step,
            oracle,
            max_tx,
        } => sweep_cmd(run, param, SweepRange { from, to, step }, oracle, max_tx)?,
        Command::Formulas(args) => println!("{}", serde_json::to_string_pretty(&formulas(args))?),
    }
    Ok(ExitCode::SUCCESS)
}
