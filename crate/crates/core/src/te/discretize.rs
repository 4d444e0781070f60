use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported alphabet; the joint table holds `bins³` cells.
pub const MAX_BINS: usize = 64;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinningScheme {
    /// Edges at the empirical k/Q quantiles; values equal to an edge fall in the lower bin.
    #[default]
    Quantile,
    /// Q equal intervals over [min, max]; the maximum lands in the top bin.
    EqualWidth,
}

impl BinningScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            BinningScheme::Quantile => "quantile",
            BinningScheme::EqualWidth => "equal-width",
        }
    }
}

impl fmt::Display for BinningScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BinningScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantile" => Ok(BinningScheme::Quantile),
            "equal-width" | "equal_width" => Ok(BinningScheme::EqualWidth),
            other => Err(Error::Config(format!("unknown binning scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSeries {
    symbols: Vec<u8>,
    bins: usize,
    scheme: BinningScheme,
}

impl SymbolSeries {
    /// Wraps pre-computed symbols, checking each is below `bins`.
    pub fn from_symbols(symbols: Vec<u8>, bins: usize, scheme: BinningScheme) -> Result<Self> {
        check_bins(bins)?;
        if let Some(s) = symbols.iter().find(|&&s| s as usize >= bins) {
            return Err(Error::Domain(format!("symbol {s} out of range for {bins} bins")));
        }
        Ok(Self {
            symbols,
            bins,
            scheme,
        })
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn scheme(&self) -> BinningScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

pub(crate) fn check_bins(bins: usize) -> Result<()> {
    if !(2..=MAX_BINS).contains(&bins) {
        return Err(Error::Config(format!(
            "bin count must be in 2..={MAX_BINS}, got {bins}"
        )));
    }
    Ok(())
}

/// Maps a real sequence onto `bins` symbols.
pub fn discretize(x: &[f64], bins: usize, scheme: BinningScheme) -> Result<SymbolSeries> {
    check_bins(bins)?;
    if x.is_empty() {
        return Err(Error::InsufficientData("cannot discretize an empty series".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("series contains non-finite values".into()));
    }
    let symbols = match scheme {
        BinningScheme::Quantile => {
            if x.len() < bins {
                return Err(Error::InsufficientData(format!(
                    "quantile binning into {bins} bins needs at least {bins} values, got {}",
                    x.len()
                )));
            }
            let edges = quantile_edges(x, bins);
            x.iter()
                .map(|v| edges.partition_point(|e| e < v) as u8)
                .collect()
        }
        BinningScheme::EqualWidth => {
            let (lo, hi) = x
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            if hi == lo {
                vec![0; x.len()]
            } else {
                let span = hi - lo;
                x.iter()
                    .map(|&v| (((v - lo) / span * bins as f64) as usize).min(bins - 1) as u8)
                    .collect()
            }
        }
    };
    Ok(SymbolSeries {
        symbols,
        bins,
        scheme,
    })
}

/// The Q−1 inner edges: the k/Q empirical quantile is the ⌈k·n/Q⌉-th order statistic.
fn quantile_edges(x: &[f64], bins: usize) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    (1..bins)
        .map(|k| sorted[(k * n).div_ceil(bins) - 1])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn thirds_of_sorted_sequence() {
        let s = discretize(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3, BinningScheme::Quantile).unwrap();
        assert_eq!(s.symbols(), &[0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn constant_maps_to_zero() {
        for scheme in [BinningScheme::Quantile, BinningScheme::EqualWidth] {
            for q in 2..6 {
                let s = discretize(&[0.25; 40], q, scheme).unwrap();
                assert!(s.symbols().iter().all(|&v| v == 0));
            }
        }
    }

    #[test]
    fn normal_draws_split_evenly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..1000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = discretize(&x, 3, BinningScheme::Quantile).unwrap();
        // oracle: count by rank after sorting
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let mut by_rank = [0usize; 3];
        for (rank, _) in order.iter().enumerate() {
            by_rank[(rank * 3) / 1000] += 1;
        }
        for (q, &expected) in by_rank.iter().enumerate() {
            let count = s.symbols().iter().filter(|&&v| v as usize == q).count();
            assert!((count as f64 - 1000.0 / 3.0).abs() <= 1.0, "bin {q}: {count}");
            assert!((count as i64 - expected as i64).abs() <= 1);
        }
    }

    #[test]
    fn ties_go_to_lower_bin() {
        let s = discretize(&[1.0, 1.0, 1.0, 2.0], 2, BinningScheme::Quantile).unwrap();
        assert_eq!(s.symbols(), &[0, 0, 0, 1]);
    }

    #[test]
    fn equal_width_places_max_in_top_bin() {
        let s = discretize(&[0.0, 0.5, 1.0, 2.0, 3.0], 3, BinningScheme::EqualWidth).unwrap();
        assert_eq!(s.symbols(), &[0, 0, 1, 2, 2]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            discretize(&[], 3, BinningScheme::Quantile),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            discretize(&[1.0, 2.0], 3, BinningScheme::Quantile),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            discretize(&[1.0, 2.0], 1, BinningScheme::Quantile),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            discretize(&[1.0, f64::NAN], 2, BinningScheme::EqualWidth),
            Err(Error::Data(_))
        ));
    }
}
