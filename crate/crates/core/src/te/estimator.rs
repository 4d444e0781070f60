use serde::{Deserialize, Serialize};

use super::discretize::{check_bins, discretize, BinningScheme, SymbolSeries};
use super::entropy::{conditional_entropy, conditional_entropy_miller_madow, ContingencyTable};
use super::lag::Lag;
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 3;
pub const DEFAULT_MIN_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasCorrection {
    #[default]
    None,
    MillerMadow,
}

/// Estimator knobs shared by every cell of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TeConfig {
    pub bins: usize,
    pub scheme: BinningScheme,
    /// Minimum aligned sample count; shorter pairs are flagged invalid.
    pub min_samples: usize,
    pub bias_correction: BiasCorrection,
}

impl Default for TeConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            scheme: BinningScheme::Quantile,
            min_samples: DEFAULT_MIN_SAMPLES,
            bias_correction: BiasCorrection::None,
        }
    }
}

impl TeConfig {
    pub fn validate(&self) -> Result<()> {
        check_bins(self.bins)?;
        if self.min_samples == 0 {
            return Err(Error::Config("min_samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Number of aligned samples for a series of `len` values: the target's own
/// history always needs one step, so samples start at index max(τ, 1).
pub fn effective_samples(len: usize, lag: Lag) -> usize {
    len.saturating_sub(lag.tau().max(1))
}

/// Transfer entropy from `x` to `y` on already-discretized series.
///
/// With τ = `lag.tau()`, the aligned samples are
/// `(y[l], y[l-1], x[l-τ])` for `l` in `max(τ,1)..len`, and the result is
/// H(Y | Y¹) − H(Y | Y¹, X^τ) over that one sample set.
pub fn transfer_entropy_symbols(
    x: &SymbolSeries,
    y: &SymbolSeries,
    lag: Lag,
    min_samples: usize,
    bias: BiasCorrection,
) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "source and target lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.bins() != y.bins() {
        return Err(Error::Domain("source and target use different alphabets".into()));
    }
    let n = effective_samples(x.len(), lag);
    if n < min_samples.max(1) {
        return Err(Error::InsufficientData(format!(
            "{n} aligned samples, need at least {min_samples}"
        )));
    }
    let q = x.bins();
    let tau = lag.tau();
    let (xs, ys) = (x.symbols(), y.symbols());

    // Conditioning on (y¹, x^τ) indexes rows by y¹·Q + x^τ; marginalising x^τ
    // gives the y¹-only table.
    let mut full = ContingencyTable::zeros(q * q, q);
    let mut own = ContingencyTable::zeros(q, q);
    for l in tau.max(1)..xs.len() {
        let target = ys[l] as usize;
        let history = ys[l - 1] as usize;
        let source = xs[l - tau] as usize;
        full.add(history * q + source, target);
        own.add(history, target);
    }
    let entropy = match bias {
        BiasCorrection::None => conditional_entropy,
        BiasCorrection::MillerMadow => conditional_entropy_miller_madow,
    };
    let te = entropy(&own)? - entropy(&full)?;
    // Rounding can leave a residue of a few ulps below zero.
    Ok(te.max(0.0))
}

/// Discretizes both series under `config` and evaluates the transfer entropy `x → y` in nats.
pub fn transfer_entropy(x: &[f64], y: &[f64], lag: Lag, config: &TeConfig) -> Result<f64> {
    config.validate()?;
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "source and target lengths differ ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let n = effective_samples(x.len(), lag);
    if n < config.min_samples {
        return Err(Error::InsufficientData(format!(
            "{n} aligned samples, need at least {}",
            config.min_samples
        )));
    }
    let xs = discretize(x, config.bins, config.scheme)?;
    let ys = discretize(y, config.bins, config.scheme)?;
    transfer_entropy_symbols(&xs, &ys, lag, config.min_samples, config.bias_correction)
}
