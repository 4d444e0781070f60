use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identification number of an ordered market pair.
///
/// Markets are 0-based indices in canonical order; ids are 1-based and run
/// row-major over the M×M grid with the diagonal skipped, so for M=10 the
/// pair (SZI → NASD) = (5, 1) gets id 47.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PairId {
    pub id: usize,
    pub source: usize,
    pub target: usize,
}

pub fn pair_id(source: usize, target: usize, markets: usize) -> Result<PairId> {
    if source == target {
        return Err(Error::Domain(format!("pair ({source}, {target}) is a self-pair")));
    }
    if source >= markets || target >= markets {
        return Err(Error::Domain(format!(
            "pair ({source}, {target}) out of range for {markets} markets"
        )));
    }
    let column = if target < source { target } else { target - 1 };
    Ok(PairId {
        id: source * (markets - 1) + column + 1,
        source,
        target,
    })
}

impl PairId {
    pub fn decode(id: usize, markets: usize) -> Result<PairId> {
        let count = markets * markets.saturating_sub(1);
        if id == 0 || id > count {
            return Err(Error::Domain(format!("pair id {id} out of range 1..={count}")));
        }
        let source = (id - 1) / (markets - 1);
        let column = (id - 1) % (markets - 1);
        let target = if column < source { column } else { column + 1 };
        Ok(PairId { id, source, target })
    }

    /// Every ordered pair in id order.
    pub fn all(markets: usize) -> Vec<PairId> {
        let count = markets * markets.saturating_sub(1);
        (1..=count)
            .map(|id| PairId::decode(id, markets).expect("id in range"))
            .collect()
    }

    pub fn reversed(self, markets: usize) -> PairId {
        pair_id(self.target, self.source, markets).expect("reverse of a valid pair")
    }

    pub fn shares_market(&self, other: &PairId) -> bool {
        self.source == other.source
            || self.source == other.target
            || self.target == other.source
            || self.target == other.target
    }
}
