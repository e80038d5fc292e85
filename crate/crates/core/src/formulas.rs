//! Closed-form competitive ratios and optimal parameters.
//!
//! These are evaluated in `f64`; every simulation and oracle quantity stays
//! exact. The `*_exact` helpers give the rational value-model bounds used for
//! exhaustive checks.

use libm::{ceil, floor, sqrt};

use crate::error::FormulaError;
use crate::params::{ModelParams, PPM};
use crate::Rational;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompetitiveBound {
    Finite(f64),
    Unbounded,
}

impl CompetitiveBound {
    /// `f64::INFINITY` when unbounded.
    pub fn value(self) -> f64 {
        match self {
            CompetitiveBound::Finite(v) => v,
            CompetitiveBound::Unbounded => f64::INFINITY,
        }
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, CompetitiveBound::Unbounded)
    }
}

/// Real-valued view of [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioInputs {
    pub c: f64,
    pub t: f64,
    pub k: f64,
    pub p: f64,
    pub tau: f64,
    pub eta: Option<f64>,
}

impl RatioInputs {
    pub fn from_params(params: &ModelParams) -> Self {
        RatioInputs {
            c: params.collateral as f64,
            t: params.max_value as f64,
            k: params.wallets as f64,
            p: params.p_ppm as f64 / PPM as f64,
            tau: params.tau as f64 / params.tau_den as f64,
            eta: params.eta_ppm.map(|e| e as f64 / PPM as f64),
        }
    }

    pub fn r(&self) -> f64 {
        self.k * self.t / self.c
    }

    /// `beta = tau / (pC)`.
    pub fn beta(&self) -> f64 {
        self.tau / (self.p * self.c)
    }
}

fn finite(xs: &[f64]) -> Result<(), FormulaError> {
    if xs.iter().all(|x| x.is_finite() && *x >= 0.0) {
        Ok(())
    } else {
        Err(FormulaError::NotFinite)
    }
}

fn sizes(c: f64, t: f64) -> Result<(), FormulaError> {
    finite(&[c, t])?;
    if c <= 0.0 || t > c {
        return Err(FormulaError::InvalidSizes);
    }
    Ok(())
}

/// FlushAll: `(2 − r)/(1 − r)`; 3 at `r = 1` with `k > 1`.
pub fn fa_ratio(k: u64, r: f64) -> Result<CompetitiveBound, FormulaError> {
    finite(&[r])?;
    if r <= 0.0 || r > 1.0 {
        return Err(FormulaError::RatioOutOfRange);
    }
    if r == 1.0 {
        return Ok(if k > 1 {
            CompetitiveBound::Finite(3.0)
        } else {
            CompetitiveBound::Unbounded
        });
    }
    Ok(CompetitiveBound::Finite((2.0 - r) / (1.0 - r)))
}

/// FlushWhenFull: `(k + 1)/(k(1 − r))`; unbounded at `r = 1`.
pub fn fwf_ratio(k: u64, r: f64) -> Result<CompetitiveBound, FormulaError> {
    finite(&[r])?;
    if k < 2 {
        return Err(FormulaError::TooFewWallets);
    }
    if r <= 0.0 || r > 1.0 {
        return Err(FormulaError::RatioOutOfRange);
    }
    if r == 1.0 {
        return Ok(CompetitiveBound::Unbounded);
    }
    Ok(CompetitiveBound::Finite(fwf_expr(k as f64, r)))
}

fn fwf_expr(k: f64, r: f64) -> f64 {
    if r >= 1.0 {
        f64::INFINITY
    } else {
        (k + 1.0) / (k * (1.0 - r))
    }
}

/// `(k + 1)/(k(1 − kT/C))` for real `k`, infinite once `kT >= C`.
pub fn fwf_ratio_continuous(k: f64, c: f64, t: f64) -> f64 {
    fwf_expr(k, k * t / c)
}

/// FlushTwoWhenFull at `r = 1`: `2(k + 1)/k`.
pub fn ftwf_ratio(k: u64) -> Result<f64, FormulaError> {
    if k < 2 {
        return Err(FormulaError::TooFewWallets);
    }
    if !k.is_multiple_of(2) {
        return Err(FormulaError::OddWalletCount);
    }
    Ok(2.0 * (k as f64 + 1.0) / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KStar {
    pub real: f64,
    pub integer: u64,
}

/// Wallet count minimising the FlushWhenFull ratio: `sqrt(1 + C/T) − 1`.
///
/// The integer choice compares both neighbours of the real optimum; the
/// ratio is not symmetric around it.
pub fn k_star(c: f64, t: f64) -> Result<KStar, FormulaError> {
    sizes(c, t)?;
    if t <= 0.0 {
        return Err(FormulaError::InvalidSizes);
    }
    let real = sqrt(1.0 + c / t) - 1.0;
    let lo = floor(real).max(1.0);
    let hi = ceil(real).max(1.0);
    let integer = [lo, hi]
        .into_iter()
        .filter(|&k| k * t <= c)
        .map(|k| (k, fwf_ratio_continuous(k, c, t)))
        .fold(None, |best: Option<(f64, f64)>, (k, v)| match best {
            Some((_, bv)) if bv <= v => best,
            _ => Some((k, v)),
        })
        .map_or(1, |(k, _)| k as u64);
    Ok(KStar { real, integer })
}

/// Profit-model inflation of the k-wallet ratio:
/// `(p − tau·k/C)/(p − tau·k/(C − kT))`.
pub fn kwallet_profit_inflation(k: u64, c: f64, t: f64, p: f64, tau: f64) -> Result<f64, FormulaError> {
    sizes(c, t)?;
    finite(&[p, tau])?;
    let k = k as f64;
    if k < 1.0 || k * t >= c {
        return Err(FormulaError::RatioOutOfRange);
    }
    let den = p - tau * k / (c - k * t);
    if den <= 0.0 {
        return Err(FormulaError::WalletsUnprofitable);
    }
    Ok((p - tau * k / c) / den)
}

/// Competitive ratio of the threshold policy:
/// `1/(1 − eta − T/C) · (p − tau/C)/(p − tau/(eta·C))`.
pub fn eta_alpha(eta: f64, c: f64, t: f64, p: f64, tau: f64) -> Result<f64, FormulaError> {
    sizes(c, t)?;
    finite(&[eta, p, tau])?;
    let x = t / c;
    if eta < x || eta <= 0.0 {
        return Err(FormulaError::EtaBelowFloor);
    }
    // 0.7 + 0.3 is not exactly 1 in binary
    if 1.0 - eta - x <= 1e-12 {
        return Err(FormulaError::EtaTooLarge);
    }
    let den = p - tau / (eta * c);
    if den <= 0.0 {
        return Err(FormulaError::EtaUnprofitable);
    }
    Ok((p - tau / c) / den / (1.0 - eta - x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaStar {
    /// The threshold to use, never below `T/C`.
    pub eta: f64,
    /// `sqrt((1 − T/C)·beta)` before clamping.
    pub unclamped: f64,
    pub clamped: bool,
}

fn beta_checked(c: f64, t: f64, p: f64, tau: f64) -> Result<f64, FormulaError> {
    sizes(c, t)?;
    finite(&[p, tau])?;
    if t >= c {
        return Err(FormulaError::InvalidSizes);
    }
    if p * c <= tau {
        return Err(FormulaError::UnprofitableCollateral);
    }
    Ok(tau / (p * c))
}

/// `eta* = sqrt((1 − T/C)·beta)` with `beta = tau/(pC)`, clamped up to `T/C`.
pub fn eta_star(c: f64, t: f64, p: f64, tau: f64) -> Result<EtaStar, FormulaError> {
    let beta = beta_checked(c, t, p, tau)?;
    let floor = t / c;
    let unclamped = sqrt((1.0 - floor) * beta);
    let clamped = unclamped < floor;
    Ok(EtaStar {
        eta: if clamped { floor } else { unclamped },
        unclamped,
        clamped,
    })
}

/// Ratio at `eta*`: `(1 − beta)/(sqrt(1 − T/C) − sqrt(beta))²`.
pub fn eta_star_ratio(c: f64, t: f64, p: f64, tau: f64) -> Result<f64, FormulaError> {
    let beta = beta_checked(c, t, p, tau)?;
    let gap = sqrt(1.0 - t / c) - sqrt(beta);
    if gap <= 0.0 {
        return Err(FormulaError::BetaTooLarge);
    }
    Ok((1.0 - beta) / (gap * gap))
}

/// FlushAll bound as an exact fraction: `(2C − kT)/(C − kT)`, or 3 at
/// `r = 1` with `k > 1`. `None` when unbounded.
pub fn fa_bound_exact(params: &ModelParams) -> Option<Rational> {
    let (c, k, t) = exact_ckt(params);
    if k * t == c {
        return (k > 1).then(|| Rational::from_integer(3));
    }
    Some(Rational::new(2 * c - k * t, c - k * t))
}

/// FlushWhenFull bound `(k + 1)C/(k(C − kT))`; `None` at `r = 1` or `k = 1`.
pub fn fwf_bound_exact(params: &ModelParams) -> Option<Rational> {
    let (c, k, t) = exact_ckt(params);
    if k < 2 || k * t >= c {
        return None;
    }
    Some(Rational::new((k + 1) * c, k * (c - k * t)))
}

/// FlushTwoWhenFull bound `2(k + 1)/k` for even `k`.
pub fn ftwf_bound_exact(params: &ModelParams) -> Option<Rational> {
    let k = i128::from(params.wallets);
    (k >= 2 && k % 2 == 0).then(|| Rational::new(2 * (k + 1), k))
}

fn exact_ckt(params: &ModelParams) -> (i128, i128, i128) {
    (
        i128::from(params.collateral),
        i128::from(params.wallets),
        i128::from(params.max_value),
    )
}
