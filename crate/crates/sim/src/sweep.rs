//! Parameter sweeps over the threshold `eta` or the wallet count `k`.

use std::fmt;
use std::str::FromStr;

use collateral_core::formulas::{eta_star, k_star, CompetitiveBound};
use collateral_core::{PolicyKind, Rational, PPM};
use rayon::prelude::*;

use crate::config::{validate_policy, ExperimentConfig};
use crate::error::HarnessError;
use crate::harness::{run_config, Instance, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Eta,
    K,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Eta => "eta",
            SweepParam::K => "k",
        })
    }
}

impl FromStr for SweepParam {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eta" => Ok(SweepParam::Eta),
            "k" => Ok(SweepParam::K),
            _ => Err(HarnessError::config(format!(
                "unknown sweep parameter {s:?} (expected eta or k)"
            ))),
        }
    }
}

/// Inclusive grid `from, from + step, …, <= to`. `eta` is given as a
/// fraction, `k` as whole numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn points(&self) -> Result<Vec<f64>, HarnessError> {
        if self.step.is_nan() || self.step <= 0.0 || !self.from.is_finite() || !self.to.is_finite() {
            return Err(HarnessError::config("sweep step must be positive and bounds finite"));
        }
        if self.to < self.from {
            return Ok(Vec::new());
        }
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize + 1;
        // Snap to 1e-9 so `0.35 + 1*0.05` prints as 0.4.
        Ok((0..n)
            .map(|i| ((self.from + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mean_value: f64,
    pub mean_flushes: f64,
    pub mean_utility: f64,
    /// Largest OPT/ALG ratio over repetitions (utility ratio in utility
    /// runs); `None` without an oracle.
    pub worst_ratio: Option<Ratio>,
    pub bound: CompetitiveBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
    /// Grid points the parameters rule out (e.g. `k` not dividing `C`).
    pub skipped: Vec<(f64, String)>,
    /// `eta*` or the integer `k*`.
    pub formula_best: Option<f64>,
    /// Grid point with the smallest worst ratio, or with the largest mean
    /// utility when no oracle ran.
    pub empirical_best: Option<f64>,
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn configure(base: &ExperimentConfig, param: SweepParam, value: f64) -> Result<ExperimentConfig, HarnessError> {
    let mut config = base.clone();
    match param {
        SweepParam::Eta => {
            if config.policy != PolicyKind::Eta {
                return Err(HarnessError::config("an eta sweep needs the eta policy"));
            }
            config.params.eta_ppm = Some((value * PPM as f64).round() as u64);
        }
        SweepParam::K => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(HarnessError::config(format!("k = {value} is not a positive integer")));
            }
            config.params.wallets = value as u64;
        }
    }
    Ok(config)
}

fn sweep_point(config: &ExperimentConfig, value: f64) -> Result<SweepRow, HarnessError> {
    let records = run_config(config)?;
    let n = records.len() as f64;
    let mean = |f: &dyn Fn(&crate::harness::RunRecord) -> f64| records.iter().map(f).sum::<f64>() / n;
    let worst_ratio = records
        .iter()
        .filter_map(|r| r.row.ratio_utility.or(r.row.ratio_value))
        .max_by(|a, b| a.as_f64().total_cmp(&b.as_f64()));
    let instance = Instance {
        params: config.params,
        policy: config.policy,
        shadow: config.shadow,
        flush_cost: config.flush_cost,
        seed: config.seed,
    };
    Ok(SweepRow {
        value,
        mean_value: mean(&|r| r.result.settled_value as f64),
        mean_flushes: mean(&|r| r.result.flush_count as f64),
        mean_utility: mean(&|r| to_f64(r.result.utility)),
        worst_ratio,
        bound: instance.bound(),
    })
}

/// Runs `config` at every grid point of `param`.
pub fn sweep(config: &ExperimentConfig, param: SweepParam, range: SweepRange) -> Result<SweepTable, HarnessError> {
    let configs: Vec<(f64, ExperimentConfig)> = range
        .points()?
        .into_iter()
        .map(|v| configure(config, param, v).map(|c| (v, c)))
        .collect::<Result<_, _>>()?;
    let mut runnable = Vec::new();
    let mut skipped = Vec::new();
    for (v, c) in configs {
        match validate_policy(c.policy, &c.params) {
            Ok(()) => runnable.push((v, c)),
            Err(e) if param == SweepParam::K => skipped.push((v, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    let rows: Vec<SweepRow> = runnable
        .par_iter()
        .map(|(v, c)| sweep_point(c, *v))
        .collect::<Result<_, _>>()?;

    let p = &config.params;
    let (c, t) = (p.collateral as f64, p.max_value as f64);
    let formula_best = match param {
        SweepParam::Eta => eta_star(c, t, p.p_ppm as f64 / PPM as f64, p.tau as f64 / p.tau_den as f64)
            .ok()
            .map(|e| e.eta),
        SweepParam::K => k_star(c, t).ok().map(|k| k.integer as f64),
    };
    let empirical_best = if rows.iter().all(|r| r.worst_ratio.is_some()) {
        rows.iter()
            .min_by(|a, b| {
                let (x, y) = (
                    a.worst_ratio.map_or(f64::INFINITY, Ratio::as_f64),
                    b.worst_ratio.map_or(f64::INFINITY, Ratio::as_f64),
                );
                x.total_cmp(&y)
            })
            .map(|r| r.value)
    } else {
        rows.iter()
            .max_by(|a, b| a.mean_utility.total_cmp(&b.mean_utility))
            .map(|r| r.value)
    };
    Ok(SweepTable {
        param,
        rows,
        skipped,
        formula_best,
        empirical_best,
    })
}
