use crate::error::ModelError;
use crate::Rational;

/// Parts-per-million denominator for the profit margin and the threshold.
pub const PPM: u64 = 1_000_000;

/// Model parameters shared by both collateral models.
///
/// Money is integral. The profit margin `p` and the threshold `eta` are fixed
/// point in parts per million. The flush cost is the fraction
/// `tau / tau_den` so that sub-unit costs stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    #[cfg_attr(feature = "serde", serde(rename = "C"))]
    pub collateral: u64,
    #[cfg_attr(feature = "serde", serde(rename = "k", default = "one"))]
    pub wallets: u64,
    #[cfg_attr(feature = "serde", serde(rename = "T"))]
    pub max_value: u64,
    #[cfg_attr(feature = "serde", serde(rename = "F"))]
    pub flush_period: u64,
    #[cfg_attr(feature = "serde", serde(default = "full_margin"))]
    pub p_ppm: u64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub tau: u64,
    #[cfg_attr(feature = "serde", serde(default = "one"))]
    pub tau_den: u64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub eta_ppm: Option<u64>,
}

#[cfg(feature = "serde")]
fn one() -> u64 {
    1
}

#[cfg(feature = "serde")]
fn full_margin() -> u64 {
    PPM
}

impl ModelParams {
    /// Value-only parameters: `p = 1`, `tau = 0`, one wallet.
    pub fn new(collateral: u64, max_value: u64, flush_period: u64) -> Self {
        ModelParams {
            collateral,
            wallets: 1,
            max_value,
            flush_period,
            p_ppm: PPM,
            tau: 0,
            tau_den: 1,
            eta_ppm: None,
        }
    }

    pub fn kwallet(collateral: u64, wallets: u64, max_value: u64, flush_period: u64) -> Self {
        ModelParams {
            wallets,
            ..Self::new(collateral, max_value, flush_period)
        }
    }

    pub fn with_utility(mut self, p_ppm: u64, tau: u64, tau_den: u64) -> Self {
        self.p_ppm = p_ppm;
        self.tau = tau;
        self.tau_den = tau_den;
        self
    }

    pub fn with_eta(mut self, eta_ppm: u64) -> Self {
        self.eta_ppm = Some(eta_ppm);
        self
    }

    pub fn validate_general(&self) -> Result<(), ModelError> {
        if self.collateral == 0 {
            return Err(ModelError::InvalidParams("C must be positive"));
        }
        if self.max_value == 0 {
            return Err(ModelError::InvalidParams("T must be positive"));
        }
        if self.flush_period == 0 {
            return Err(ModelError::InvalidParams("F must be positive"));
        }
        if self.max_value > self.collateral {
            return Err(ModelError::InvalidParams("T must not exceed C"));
        }
        if self.p_ppm == 0 || self.p_ppm > PPM {
            return Err(ModelError::InvalidParams("p must lie in (0, 1]"));
        }
        if self.tau_den == 0 {
            return Err(ModelError::InvalidParams("tau denominator must be positive"));
        }
        if !self.collateral_profitable() {
            return Err(ModelError::InvalidParams("requires pC > tau"));
        }
        Ok(())
    }

    pub fn validate_kwallet(&self) -> Result<(), ModelError> {
        self.validate_general()?;
        if self.wallets == 0 {
            return Err(ModelError::InvalidParams("k must be positive"));
        }
        if !self.collateral.is_multiple_of(self.wallets) {
            return Err(ModelError::InvalidParams("C must be divisible by k"));
        }
        if self.wallets.saturating_mul(self.max_value) > self.collateral {
            return Err(ModelError::InvalidParams("kT must not exceed C"));
        }
        Ok(())
    }

    /// Checks `T/C <= eta <= 1` in ppm arithmetic.
    pub fn validate_eta(&self) -> Result<u64, ModelError> {
        let eta = self.eta_ppm.ok_or(ModelError::InvalidEta)?;
        let floor_ok = u128::from(eta) * u128::from(self.collateral) >= u128::from(self.max_value) * u128::from(PPM);
        if eta == 0 || eta > PPM || !floor_ok {
            return Err(ModelError::InvalidEta);
        }
        Ok(eta)
    }

    /// `pC > tau`, checked as `p_ppm * C * tau_den > tau * 10^6`.
    pub fn collateral_profitable(&self) -> bool {
        u128::from(self.p_ppm) * u128::from(self.collateral) * u128::from(self.tau_den)
            > u128::from(self.tau) * u128::from(PPM)
    }

    pub fn wallet_size(&self) -> u64 {
        self.collateral / self.wallets.max(1)
    }

    /// `r = kT/C` as an exact fraction.
    pub fn r(&self) -> Rational {
        Rational::new(
            i128::from(self.wallets) * i128::from(self.max_value),
            i128::from(self.collateral),
        )
    }

    pub fn is_full_size(&self) -> bool {
        self.wallets * self.max_value == self.collateral
    }

    pub fn p(&self) -> Rational {
        Rational::new(i128::from(self.p_ppm), i128::from(PPM))
    }

    pub fn tau_rational(&self) -> Rational {
        Rational::new(i128::from(self.tau), i128::from(self.tau_den))
    }

    pub fn eta(&self) -> Option<Rational> {
        self.eta_ppm.map(|e| Rational::new(i128::from(e), i128::from(PPM)))
    }

    /// Utility `p·V − tau·f`.
    pub fn utility(&self, settled_value: u64, flushes: u64) -> Rational {
        self.p() * Rational::from_integer(i128::from(settled_value))
            - self.tau_rational() * Rational::from_integer(i128::from(flushes))
    }
}
