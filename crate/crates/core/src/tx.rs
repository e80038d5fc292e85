use alloc::vec::Vec;

use crate::error::ModelError;

/// A transaction arriving at a 1-based slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Transaction {
    pub slot: u64,
    pub value: u64,
}

impl Transaction {
    pub const fn new(slot: u64, value: u64) -> Self {
        Transaction { slot, value }
    }
}

/// Transactions with strictly increasing slots (at most one per slot) and a
/// horizon that is at least the last transaction slot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransactionSequence {
    txs: Vec<Transaction>,
    horizon: u64,
}

impl TransactionSequence {
    pub fn new(txs: Vec<Transaction>, horizon: u64) -> Result<Self, ModelError> {
        let mut prev = 0;
        for tx in &txs {
            if tx.slot == 0 {
                return Err(ModelError::InvalidSequence("slots are 1-based"));
            }
            if tx.value == 0 {
                return Err(ModelError::InvalidSequence("transaction values must be positive"));
            }
            if tx.slot <= prev {
                return Err(ModelError::InvalidSequence("slots must be strictly increasing"));
            }
            prev = tx.slot;
        }
        if horizon < prev {
            return Err(ModelError::InvalidSequence("horizon precedes the last transaction"));
        }
        Ok(TransactionSequence { txs, horizon })
    }

    /// Horizon defaults to the last transaction slot.
    pub fn from_txs(txs: Vec<Transaction>) -> Result<Self, ModelError> {
        let horizon = txs.last().map_or(0, |t| t.slot);
        Self::new(txs, horizon)
    }

    /// Values at slots `1..=values.len()`; `None` leaves the slot empty.
    pub fn from_slots(values: &[Option<u64>]) -> Result<Self, ModelError> {
        let txs = values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| Transaction::new(i as u64 + 1, v)))
            .collect();
        Self::new(txs, values.len() as u64)
    }

    /// Consecutive slots starting at 1.
    pub fn from_values(values: &[u64]) -> Result<Self, ModelError> {
        let txs = values
            .iter()
            .enumerate()
            .map(|(i, &v)| Transaction::new(i as u64 + 1, v))
            .collect();
        Self::new(txs, values.len() as u64)
    }

    pub fn txs(&self) -> &[Transaction] {
        &self.txs
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.txs.is_empty()
    }

    pub fn total_value(&self) -> u64 {
        self.txs.iter().map(|t| t.value).sum()
    }

    pub fn max_value(&self) -> u64 {
        self.txs.iter().map(|t| t.value).max().unwrap_or(0)
    }

    pub fn at(&self, slot: u64) -> Option<&Transaction> {
        self.txs
            .binary_search_by_key(&slot, |t| t.slot)
            .ok()
            .map(|i| &self.txs[i])
    }

    /// Transactions with slot `<= slot`; horizon becomes `slot`.
    pub fn prefix(&self, slot: u64) -> TransactionSequence {
        let end = self.txs.partition_point(|t| t.slot <= slot);
        TransactionSequence {
            txs: self.txs[..end].to_vec(),
            horizon: slot,
        }
    }

    /// Checks `value <= T` for every transaction.
    pub fn check_max_value(&self, max_value: u64) -> Result<(), ModelError> {
        if self.txs.iter().any(|t| t.value > max_value) {
            return Err(ModelError::InvalidSequence("transaction value exceeds T"));
        }
        Ok(())
    }

    pub fn push(&mut self, tx: Transaction) -> Result<(), ModelError> {
        if tx.value == 0 || tx.slot == 0 {
            return Err(ModelError::InvalidSequence("slot and value must be positive"));
        }
        if self.txs.last().is_some_and(|l| l.slot >= tx.slot) {
            return Err(ModelError::InvalidSequence("slots must be strictly increasing"));
        }
        self.txs.push(tx);
        self.horizon = self.horizon.max(tx.slot);
        Ok(())
    }

    pub fn extend_horizon(&mut self, horizon: u64) {
        self.horizon = self.horizon.max(horizon);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_duplicate_and_zero_slots() {
        let dup = vec![Transaction::new(1, 1), Transaction::new(1, 2)];
        assert!(TransactionSequence::from_txs(dup).is_err());
        assert!(TransactionSequence::from_txs(vec![Transaction::new(0, 1)]).is_err());
        assert!(TransactionSequence::from_txs(vec![Transaction::new(1, 0)]).is_err());
        assert!(TransactionSequence::new(vec![Transaction::new(3, 1)], 2).is_err());
    }

    #[test]
    fn prefix_and_lookup() {
        let seq = TransactionSequence::from_slots(&[Some(2), None, Some(3), Some(1)]).unwrap();
        assert_eq!(seq.horizon(), 4);
        assert_eq!(seq.at(3), Some(&Transaction::new(3, 3)));
        assert_eq!(seq.at(2), None);
        let p = seq.prefix(2);
        assert_eq!(p.len(), 1);
        assert_eq!(p.horizon(), 2);
        assert_eq!(seq.total_value(), 6);
    }
}
