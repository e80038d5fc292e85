use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use collateral_core::workload::WorkloadSpec;
use collateral_core::{FlushCostMode, ModelParams, PolicyKind, ShadowSize};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Oracle selector: `brute-general | brute-kwallet | brute-utility | window-bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    BruteGeneral,
    BruteKwallet,
    BruteUtility,
    WindowBound,
}

impl OracleKind {
    pub const ALL: [OracleKind; 4] = [
        OracleKind::BruteGeneral,
        OracleKind::BruteKwallet,
        OracleKind::BruteUtility,
        OracleKind::WindowBound,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OracleKind::BruteGeneral => "brute-general",
            OracleKind::BruteKwallet => "brute-kwallet",
            OracleKind::BruteUtility => "brute-utility",
            OracleKind::WindowBound => "window-bound",
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OracleKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OracleKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| HarnessError::config(format!("unknown oracle {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryKind {
    Thm3,
    Fwfkiller,
    Burst,
}

impl FromStr for AdversaryKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "thm3" => Ok(AdversaryKind::Thm3),
            "fwfkiller" => Ok(AdversaryKind::Fwfkiller),
            "burst" => Ok(AdversaryKind::Burst),
            _ => Err(HarnessError::config(format!("unknown adversary {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversarySpec {
    #[serde(rename = "type")]
    pub kind: AdversaryKind,
    #[serde(default = "one")]
    pub epsilon: u64,
    pub rounds: u64,
}

/// Where the transactions of a run come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadSource {
    Generate(WorkloadSpec),
    /// CSV file with header `slot,value`.
    Sequence(PathBuf),
    Adversary(AdversarySpec),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

fn one() -> u64 {
    1
}

fn default_budget() -> usize {
    12
}

/// A JSON experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub params: ModelParams,
    pub policy: PolicyKind,
    #[serde(default)]
    pub shadow: ShadowSize,
    #[serde(default)]
    pub flush_cost: FlushCostMode,
    pub workload: WorkloadSource,
    #[serde(default)]
    pub oracle: Option<OracleKind>,
    /// Oracle transaction budget.
    #[serde(default = "default_budget")]
    pub max_transactions: usize,
    /// Additive allowance in the bound check, as `"num/den"`; defaults to 0
    /// for value runs and `pC + tau` for utility runs.
    #[serde(default, with = "opt_ratio")]
    pub slack: Option<Ratio<i128>>,
    #[serde(default = "one")]
    pub repetitions: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Outputs,
}

mod opt_ratio {
    use num_rational::Ratio;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Ratio<i128>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(r) => s.serialize_str(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Ratio<i128>>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

impl ExperimentConfig {
    pub fn new(params: ModelParams, policy: PolicyKind, workload: WorkloadSource) -> Self {
        ExperimentConfig {
            params,
            policy,
            shadow: ShadowSize::Full,
            flush_cost: FlushCostMode::PerWallet,
            workload,
            oracle: None,
            max_transactions: default_budget(),
            slack: None,
            repetitions: 1,
            seed: 0,
            output: Outputs::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    /// Checks policy/parameter compatibility and that input files exist.
    pub fn validate(&self) -> Result<(), HarnessError> {
        validate_policy(self.policy, &self.params)?;
        if let WorkloadSource::Sequence(path) = &self.workload {
            if !path.is_file() {
                return Err(HarnessError::config(format!(
                    "sequence file {} does not exist",
                    path.display()
                )));
            }
        }
        if let WorkloadSource::Adversary(adv) = &self.workload {
            if adv.kind == AdversaryKind::Thm3 && self.policy == PolicyKind::Eta {
                return Err(HarnessError::config("the thm3 adversary needs a wallet policy"));
            }
        }
        if self.repetitions == 0 {
            return Err(HarnessError::config("repetitions must be positive"));
        }
        Ok(())
    }
}

pub fn validate_policy(policy: PolicyKind, params: &ModelParams) -> Result<(), HarnessError> {
    match policy {
        PolicyKind::Eta => {
            params.validate_general()?;
            params.validate_eta()?;
        }
        PolicyKind::Ftwf => {
            params.validate_kwallet()?;
            if !params.wallets.is_multiple_of(2) {
                return Err(HarnessError::config("ftwf needs an even wallet count"));
            }
        }
        PolicyKind::Rand2 => {
            params.validate_kwallet()?;
            if params.wallets != 1 {
                return Err(HarnessError::config("rand2 runs a single wallet (k = 1)"));
            }
        }
        PolicyKind::Fa | PolicyKind::Fwf => params.validate_kwallet()?,
    }
    Ok(())
}
