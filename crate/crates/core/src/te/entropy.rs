use crate::error::{Error, Result};

/// Counts of (conditioning value, target value) pairs, stored row-major with
/// one row per conditioning value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<u64>,
    targets: usize,
}

impl ContingencyTable {
    pub fn zeros(conditions: usize, targets: usize) -> Self {
        Self {
            counts: vec![0; conditions * targets],
            targets,
        }
    }

    /// Builds a table from nested rows, one per conditioning value.
    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let targets = rows.first().map_or(0, Vec::len);
        if targets == 0 || rows.iter().any(|r| r.len() != targets) {
            return Err(Error::Domain("contingency rows must be non-empty and equal length".into()));
        }
        Ok(Self {
            counts: rows.concat(),
            targets,
        })
    }

    #[inline]
    pub fn add(&mut self, condition: usize, target: usize) {
        self.counts[condition * self.targets + target] += 1;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks_exact(self.targets)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Plug-in H(Y | C) = −Σ P(y,c) ln P(y|c) in nats, with 0·ln 0 = 0.
pub fn conditional_entropy(table: &ContingencyTable) -> Result<f64> {
    let total = table.total();
    if total == 0 {
        return Err(Error::InsufficientData("contingency table is empty".into()));
    }
    let mut acc = 0.0;
    for row in table.rows() {
        let row_total: u64 = row.iter().sum();
        if row_total == 0 {
            continue;
        }
        let rt = row_total as f64;
        for &c in row.iter().filter(|&&c| c > 0) {
            let c = c as f64;
            acc += c * (rt / c).ln();
        }
    }
    Ok(acc / total as f64)
}

/// [`conditional_entropy`] plus the Miller–Madow term (K_yc − K_c) / 2N,
/// with K counting occupied joint cells and occupied conditioning rows.
pub fn conditional_entropy_miller_madow(table: &ContingencyTable) -> Result<f64> {
    let plug_in = conditional_entropy(table)?;
    let mut joint_cells = 0usize;
    let mut rows = 0usize;
    for row in table.rows() {
        let occupied = row.iter().filter(|&&c| c > 0).count();
        joint_cells += occupied;
        rows += usize::from(occupied > 0);
    }
    Ok(plug_in + (joint_cells - rows) as f64 / (2.0 * table.total() as f64))
}
