//! Randomized single-wallet policy for `k = r = 1`.
//!
//! A shadow two-wallet FlushAll runs on every arrival. Whenever the real
//! wallet comes online a fair coin picks one shadow wallet; the real wallet
//! settles exactly what that shadow wallet settles and flushes when the
//! shadow flushes.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Action, FlushAll, Flushes, PolicyDecision, Target, WalletPolicy};
use crate::error::ModelError;
use crate::tx::Transaction;
use crate::wallet::WalletBankState;

pub trait CoinSource {
    /// `false` picks shadow wallet 1, `true` shadow wallet 2.
    fn flip(&mut self) -> bool;
}

#[derive(Debug, Clone)]
pub struct SeededCoins(ChaCha8Rng);

impl SeededCoins {
    pub fn new(seed: u64) -> Self {
        SeededCoins(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl CoinSource for SeededCoins {
    fn flip(&mut self) -> bool {
        self.0.random()
    }
}

/// Replays fixed outcomes, then yields `false`.
#[derive(Debug, Clone, Default)]
pub struct ScriptedCoins {
    outcomes: Vec<bool>,
    next: usize,
}

impl ScriptedCoins {
    pub fn new(outcomes: Vec<bool>) -> Self {
        ScriptedCoins { outcomes, next: 0 }
    }

    /// The outcomes encoded by the low `flips` bits of `mask`.
    pub fn from_mask(mask: u64, flips: usize) -> Self {
        Self::new((0..flips).map(|b| mask >> b & 1 == 1).collect())
    }
}

impl CoinSource for ScriptedCoins {
    fn flip(&mut self) -> bool {
        let out = self.outcomes.get(self.next).copied().unwrap_or(false);
        self.next += 1;
        out
    }
}

/// Size of each shadow wallet relative to the real wallet.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ShadowSize {
    /// Each shadow wallet is as large as the real wallet (2C in total).
    #[default]
    Full,
    /// Each shadow wallet holds half of the real wallet.
    Half,
}

#[derive(Debug, Clone)]
pub struct RandomizedSingleWallet<C> {
    shadow: WalletBankState,
    shadow_policy: FlushAll,
    coins: C,
    chosen: Option<usize>,
    flips: Vec<bool>,
}

impl<C: CoinSource> RandomizedSingleWallet<C> {
    pub fn new(wallet_size: u64, flush_period: u64, shadow: ShadowSize, coins: C) -> Result<Self, ModelError> {
        let size = match shadow {
            ShadowSize::Full => wallet_size,
            ShadowSize::Half => wallet_size / 2,
        };
        Ok(RandomizedSingleWallet {
            shadow: WalletBankState::with_wallets(2, size, flush_period)?.silent(),
            shadow_policy: FlushAll,
            coins,
            chosen: None,
            flips: Vec::new(),
        })
    }

    /// Coin outcomes drawn so far.
    pub fn flips(&self) -> &[bool] {
        &self.flips
    }

    pub fn shadow(&self) -> &WalletBankState {
        &self.shadow
    }
}

impl<C: CoinSource> WalletPolicy for RandomizedSingleWallet<C> {
    fn name(&self) -> &'static str {
        "rand2"
    }

    fn decide(&mut self, bank: &WalletBankState, slot: u64, tx: Option<&Transaction>) -> PolicyDecision {
        let online = matches!(bank.is_available(0, slot), Ok(true));
        if online && self.chosen.is_none() {
            let heads = self.coins.flip();
            self.flips.push(heads);
            self.chosen = Some(usize::from(heads));
        }

        self.shadow.begin_slot(slot);
        let shadow = self.shadow_policy.decide(&self.shadow, slot, tx);
        if let (Action::Settle(Target::Wallet(w)), Some(tx)) = (shadow.action, tx) {
            self.shadow
                .settle(w, tx, slot)
                .expect("shadow FlushAll only settles where it fits");
        }
        let shadow_flushed = matches!(&shadow.flushes, Flushes::Wallets(ws) if !ws.is_empty());
        if let Flushes::Wallets(ws) = &shadow.flushes {
            for &w in ws {
                self.shadow
                    .flush(w, slot)
                    .expect("shadow FlushAll only flushes online wallets");
            }
        }

        let mut decision = match (shadow.action, tx) {
            (_, None) => PolicyDecision::idle(),
            (Action::Settle(Target::Wallet(w)), Some(_)) if Some(w) == self.chosen && online => {
                PolicyDecision::settle_in(0)
            }
            _ => PolicyDecision::discard(),
        };
        if shadow_flushed && online {
            decision.flushes = Flushes::Wallets(vec![0]);
            self.chosen = None;
        }
        decision
    }
}
