use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Pareto};

use crate::error::WorkloadError;
use crate::tx::{Transaction, TransactionSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum WorkloadKind {
    PoissonUniform,
    PoissonExponential,
    PoissonPareto,
    Constant,
    /// Uniform values, arrivals only during the on-phase of a repeating
    /// `burst_len` on / `gap_len` off cycle.
    Bursty,
}

/// Per-kind value parameters; unused fields are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase", default))]
pub struct ValueParams {
    /// Uniform lower end, Pareto scale. Defaults to 1.
    pub min: Option<u64>,
    /// Uniform upper end. Defaults to `T`.
    pub max: Option<u64>,
    pub mean: Option<f64>,
    pub tail_index: Option<f64>,
    pub value: Option<u64>,
    pub burst_len: Option<u64>,
    pub gap_len: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    /// Per-slot arrival probability in thousandths.
    pub arrival_rate_per_mille: u32,
    #[cfg_attr(feature = "serde", serde(default))]
    pub value_params: ValueParams,
    pub horizon: u64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn uniform(rate_per_mille: u32, horizon: u64, seed: u64) -> Self {
        WorkloadSpec {
            kind: WorkloadKind::PoissonUniform,
            arrival_rate_per_mille: rate_per_mille,
            value_params: ValueParams::default(),
            horizon,
            seed,
        }
    }

    pub fn constant(value: u64, rate_per_mille: u32, horizon: u64, seed: u64) -> Self {
        WorkloadSpec {
            kind: WorkloadKind::Constant,
            arrival_rate_per_mille: rate_per_mille,
            value_params: ValueParams {
                value: Some(value),
                ..ValueParams::default()
            },
            horizon,
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

enum Values {
    Uniform(u64, u64),
    Exponential(Exp<f64>),
    Pareto(Pareto<f64>),
    Constant(u64),
}

impl Values {
    fn new(spec: &WorkloadSpec, max_value: u64) -> Result<Self, WorkloadError> {
        let vp = &spec.value_params;
        let uniform = || {
            let lo = vp.min.unwrap_or(1).max(1);
            let hi = vp.max.unwrap_or(max_value).min(max_value);
            if lo > hi {
                return Err(WorkloadError::InvalidSpec("uniform range is empty"));
            }
            Ok(Values::Uniform(lo, hi))
        };
        match spec.kind {
            WorkloadKind::PoissonUniform | WorkloadKind::Bursty => uniform(),
            WorkloadKind::PoissonExponential => {
                let mean = vp.mean.ok_or(WorkloadError::InvalidSpec("exponential needs mean"))?;
                Exp::new(1.0 / mean)
                    .ok()
                    .filter(|_| mean > 0.0)
                    .map(Values::Exponential)
                    .ok_or(WorkloadError::InvalidSpec("mean must be positive"))
            }
            WorkloadKind::PoissonPareto => {
                let tail = vp
                    .tail_index
                    .ok_or(WorkloadError::InvalidSpec("pareto needs tailIndex"))?;
                let scale = vp.min.unwrap_or(1).max(1) as f64;
                Pareto::new(scale, tail)
                    .map(Values::Pareto)
                    .map_err(|_| WorkloadError::InvalidSpec("tail index must be positive"))
            }
            WorkloadKind::Constant => vp
                .value
                .filter(|&v| v > 0)
                .map(Values::Constant)
                .ok_or(WorkloadError::InvalidSpec("constant needs a positive value")),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Values::Uniform(lo, hi) => rng.random_range(*lo..=*hi) as f64,
            Values::Exponential(d) => d.sample(rng),
            Values::Pareto(d) => d.sample(rng),
            Values::Constant(v) => *v as f64,
        }
    }
}

/// Draws a sequence over slots `1..=horizon`: each slot gets a transaction
/// with probability `rate/1000`, its value rounded and clamped to `[1, T]`.
pub fn gen_stochastic(spec: &WorkloadSpec, max_value: u64) -> Result<TransactionSequence, WorkloadError> {
    if spec.arrival_rate_per_mille > 1000 {
        return Err(WorkloadError::InvalidSpec("arrival rate exceeds 1000 per mille"));
    }
    if max_value == 0 {
        return Err(WorkloadError::InvalidParams("T must be positive"));
    }
    let values = Values::new(spec, max_value)?;
    let cycle = match spec.kind {
        WorkloadKind::Bursty => {
            let on = spec.value_params.burst_len.unwrap_or(0);
            if on == 0 {
                return Err(WorkloadError::InvalidSpec("bursty needs a positive burstLen"));
            }
            Some((on, on + spec.value_params.gap_len.unwrap_or(0)))
        }
        _ => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut txs = Vec::new();
    for slot in 1..=spec.horizon {
        let arrives = rng.random_range(0..1000u32) < spec.arrival_rate_per_mille;
        let in_burst = cycle.is_none_or(|(on, period)| (slot - 1) % period < on);
        if !(arrives && in_burst) {
            continue;
        }
        let raw = libm::round(values.draw(&mut rng));
        let value = if raw.is_finite() && raw >= 1.0 {
            (raw as u64).min(max_value)
        } else if raw.is_finite() {
            1
        } else {
            max_value
        };
        txs.push(Transaction::new(slot, value));
    }
    Ok(TransactionSequence::new(txs, spec.horizon)?)
}
