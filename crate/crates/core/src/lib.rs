//! Online collateral-maintenance policies for layer-two settlement.
//!
//! Two collateral models are provided. In the k-wallet model the collateral
//! `C` is split into `k` wallets of `C/k` that are flushed as a whole; in the
//! general model a single pool may flush any committed portion. A flush at
//! slot `t` keeps the flushed collateral offline for slots `t+1..=t+F`.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the command line live in the `collateral-sim` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod formulas;
pub mod invariants;
pub mod oracle;
pub mod params;
pub mod policy;
pub mod pool;
pub mod sim;
pub mod trace;
pub mod tx;
pub mod wallet;
pub mod workload;

pub use error::{FormulaError, ModelError, OracleError, WorkloadError};
pub use params::{ModelParams, PPM};
pub use policy::{
    Action, CoinSource, FlushAll, FlushTwoWhenFull, FlushWhenFull, Flushes, PolicyDecision, PolicyKind,
    RandomizedSingleWallet, ScriptedCoins, SeededCoins, ShadowSize, Target, ThresholdPolicy, WalletPolicy,
};
pub use pool::{Amount, PoolState};
pub use sim::{FlushCostMode, RunOptions};
pub use trace::{Event, EventKind, RunResult};
pub use tx::{Transaction, TransactionSequence};
pub use wallet::WalletBankState;

/// Exact rational used for utilities and ratios.
pub type Rational = num_rational::Ratio<i128>;
