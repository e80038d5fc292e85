//! Online settlement policies.
//!
//! A policy only decides; the simulation driver applies the decision to the
//! collateral state (settle first, then flushes). Decisions at slot `t` see
//! nothing later than `t`.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::pool::Amount;
use crate::tx::Transaction;
use crate::wallet::WalletBankState;

mod flush_all;
mod flush_two;
mod flush_when_full;
mod randomized;
mod threshold;

pub use flush_all::FlushAll;
pub use flush_two::FlushTwoWhenFull;
pub use flush_when_full::FlushWhenFull;
pub use randomized::{CoinSource, RandomizedSingleWallet, ScriptedCoins, SeededCoins, ShadowSize};
pub use threshold::ThresholdPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Wallet(usize),
    Pool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// No transaction this slot.
    Idle,
    Settle(Target),
    Discard,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Flushes {
    #[default]
    None,
    Wallets(Vec<usize>),
    Pool(Amount),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyDecision {
    pub action: Action,
    pub flushes: Flushes,
}

impl PolicyDecision {
    pub fn idle() -> Self {
        PolicyDecision {
            action: Action::Idle,
            flushes: Flushes::None,
        }
    }

    pub fn discard() -> Self {
        PolicyDecision {
            action: Action::Discard,
            flushes: Flushes::None,
        }
    }

    pub fn settle_in(wallet: usize) -> Self {
        PolicyDecision {
            action: Action::Settle(Target::Wallet(wallet)),
            flushes: Flushes::None,
        }
    }

    pub fn with_flushes(mut self, flushes: Flushes) -> Self {
        self.flushes = flushes;
        self
    }

    pub fn settled(&self) -> bool {
        matches!(self.action, Action::Settle(_))
    }
}

/// A policy over the k-wallet bank.
pub trait WalletPolicy {
    fn name(&self) -> &'static str;

    /// Called once per slot after returning wallets were restored.
    fn decide(&mut self, bank: &WalletBankState, slot: u64, tx: Option<&Transaction>) -> PolicyDecision;
}

impl<P: WalletPolicy + ?Sized> WalletPolicy for alloc::boxed::Box<P> {
    fn name(&self) -> &'static str {
        (**self).name()
    }

    fn decide(&mut self, bank: &WalletBankState, slot: u64, tx: Option<&Transaction>) -> PolicyDecision {
        (**self).decide(bank, slot, tx)
    }
}

/// Policy selector: `fa | fwf | ftwf | rand2 | eta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PolicyKind {
    Fa,
    Fwf,
    Ftwf,
    Rand2,
    Eta,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Fa,
        PolicyKind::Fwf,
        PolicyKind::Ftwf,
        PolicyKind::Rand2,
        PolicyKind::Eta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Fa => "fa",
            PolicyKind::Fwf => "fwf",
            PolicyKind::Ftwf => "ftwf",
            PolicyKind::Rand2 => "rand2",
            PolicyKind::Eta => "eta",
        }
    }

    pub fn uses_pool(self) -> bool {
        self == PolicyKind::Eta
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownPolicy;

impl fmt::Display for UnknownPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("unknown policy (expected fa, fwf, ftwf, rand2 or eta)")
    }
}

impl core::error::Error for UnknownPolicy {}

impl FromStr for PolicyKind {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or(UnknownPolicy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selector_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.as_str().parse::<PolicyKind>(), Ok(k));
        }
        assert!("flushall".parse::<PolicyKind>().is_err());
    }
}
