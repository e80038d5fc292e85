use thiserror::Error;

/// Errors raised by the collateral state machines and policies.
///
/// `WalletOffline`, `InsufficientCollateral` and the flush errors signal a
/// policy bug: the state machines never discard silently.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("invalid transaction sequence: {0}")]
    InvalidSequence(&'static str),
    #[error("wallet index {index} out of range (bank has {count} wallets)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("wallet {wallet} is offline at slot {slot}")]
    WalletOffline { wallet: usize, slot: u64 },
    #[error("insufficient collateral: need {needed}, have {available}")]
    InsufficientCollateral { needed: u64, available: u64 },
    #[error("flush of {amount} exceeds committed collateral {committed}")]
    FlushExceedsCommitted { amount: u64, committed: u64 },
    #[error("flush amount must be positive")]
    ZeroFlush,
    #[error("flush-two-when-full needs an even wallet count, got {0}")]
    OddWalletCount(u64),
    #[error("threshold must satisfy T/C <= eta <= 1")]
    InvalidEta,
    #[error("transaction slot {tx_slot} does not match current slot {slot}")]
    SlotMismatch { tx_slot: u64, slot: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{len} transactions exceed the oracle budget of {max}")]
    BudgetExceeded { len: usize, max: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkloadError {
    #[error("invalid workload spec: {0}")]
    InvalidSpec(&'static str),
    #[error("invalid parameters: {0}")]
    InvalidParams(&'static str),
    #[error("adversary needs a single-wallet target")]
    NotSingleWallet,
    #[error("microtransaction size must divide the wallet size")]
    EpsilonDoesNotDivideC,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("r = kT/C must lie in (0, 1]")]
    RatioOutOfRange,
    #[error("wallet count must be greater than one")]
    TooFewWallets,
    #[error("wallet count must be even")]
    OddWalletCount,
    #[error("requires 0 < T <= C")]
    InvalidSizes,
    #[error("threshold below T/C")]
    EtaBelowFloor,
    #[error("1 - eta - T/C must be positive")]
    EtaTooLarge,
    #[error("flushing at this threshold is unprofitable (p/tau <= 1/(eta C))")]
    EtaUnprofitable,
    #[error("per-wallet profit is not positive (p/tau <= k/(C - kT))")]
    WalletsUnprofitable,
    #[error("requires pC > tau")]
    UnprofitableCollateral,
    #[error("requires sqrt(1 - T/C) > sqrt(beta)")]
    BetaTooLarge,
    #[error("parameters must be finite and non-negative")]
    NotFinite,
}
