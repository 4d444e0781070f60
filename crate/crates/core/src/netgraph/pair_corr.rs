use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::pair_id::PairId;
use crate::error::{Error, Result};
use crate::market::{MarketMeta, Zone};
use crate::metrics::{mean_std, shifted_mean};
use crate::par::Execution;
use crate::te::TeMatrixSeries;

/// Pearson correlations between the TE time series of every two ordered pairs.
#[derive(Debug, Clone)]
pub struct PairCorrMatrix {
    pub pairs: Vec<PairId>,
    /// Symmetric, unit diagonal; NaN where either pair was flagged.
    pub values: Array2<f64>,
    /// Pairs whose series had a flagged segment or zero variance.
    pub flagged: Vec<bool>,
    /// Mean of the valid strict upper triangle.
    pub mean: f64,
    /// Population standard deviation of the valid strict upper triangle.
    pub std: f64,
}

impl PairCorrMatrix {
    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        let v = self.values[[a, b]];
        v.is_finite().then_some(v)
    }

    /// Valid strict-upper-triangle values in row-major order.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let n = self.size();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.get(i, j))
            .collect()
    }
}

/// Correlates every two ordered-pair TE series. Rows are computed in parallel
/// under `exec`; each unordered combination is evaluated once and mirrored.
pub fn pair_correlations(series: &TeMatrixSeries, exec: Execution) -> Result<PairCorrMatrix> {
    let w = series.len();
    if w < 3 {
        return Err(Error::InsufficientData(format!(
            "pair correlations need at least 3 segments, got {w}"
        )));
    }
    let pairs = PairId::all(series.n_markets());
    let n = pairs.len();

    // Centre and scale each series so a correlation is a plain dot product.
    let normalised: Vec<Option<Vec<f64>>> = pairs
        .iter()
        .map(|p| {
            let x = series.pair_series(p.source, p.target);
            if x.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let mean = shifted_mean(&x)?;
            let centred: Vec<f64> = x.iter().map(|v| v - mean).collect();
            let norm = centred.iter().map(|v| v * v).sum::<f64>().sqrt();
            (norm > 0.0).then(|| centred.iter().map(|v| v / norm).collect())
        })
        .collect();

    let rows = exec.map(n, |i| {
        (i + 1..n)
            .map(|j| match (&normalised[i], &normalised[j]) {
                (Some(a), Some(b)) => {
                    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    dot.clamp(-1.0, 1.0)
                }
                _ => f64::NAN,
            })
            .collect::<Vec<_>>()
    });

    let mut values = Array2::from_elem((n, n), f64::NAN);
    for (i, row) in rows.into_iter().enumerate() {
        values[[i, i]] = 1.0;
        for (k, v) in row.into_iter().enumerate() {
            values[[i, i + 1 + k]] = v;
            values[[i + 1 + k, i]] = v;
        }
    }
    let mut out = PairCorrMatrix {
        pairs,
        values,
        flagged: normalised.iter().map(Option::is_none).collect(),
        mean: f64::NAN,
        std: f64::NAN,
    };
    let upper = out.upper_triangle();
    if let Some((mean, std)) = mean_std(&upper) {
        out.mean = mean;
        out.std = std;
    }
    Ok(out)
}

/// Which correlations become links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairFilter {
    /// Keep |C| outside the closed interval [lo, hi].
    Band { lo: f64, hi: f64 },
    /// Keep |C| ≥ threshold.
    AtLeast { threshold: f64 },
}

impl PairFilter {
    /// [μ_C − σ_C, μ_C + σ_C].
    pub fn one_sigma_band(corr: &PairCorrMatrix) -> Self {
        PairFilter::Band {
            lo: corr.mean - corr.std,
            hi: corr.mean + corr.std,
        }
    }

    /// |C| ≥ μ_C + k·σ_C.
    pub fn sigma_above(corr: &PairCorrMatrix, k: f64) -> Self {
        PairFilter::AtLeast {
            threshold: corr.mean + k * corr.std,
        }
    }

    pub fn keeps(&self, abs_corr: f64) -> bool {
        match *self {
            PairFilter::Band { lo, hi } => abs_corr < lo || abs_corr > hi,
            PairFilter::AtLeast { threshold } => abs_corr >= threshold,
        }
    }

    fn below(&self, abs_corr: f64) -> bool {
        matches!(*self, PairFilter::Band { lo, .. } if abs_corr < lo)
    }
}

impl fmt::Display for PairFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairFilter::Band { lo, hi } => write!(f, "|C| outside [{lo:.5}, {hi:.5}]"),
            PairFilter::AtLeast { threshold } => write!(f, "|C| >= {threshold:.5}"),
        }
    }
}

/// How the two pairs joined by a link relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkKind {
    /// m→n with n→m.
    Mutual,
    /// Both pairs run from a European to an American market.
    EuropeToAmerica,
    /// The pairs have a market in common.
    SharedMarket,
    Disjoint,
}

impl LinkKind {
    pub const ALL: [LinkKind; 4] = [
        LinkKind::Mutual,
        LinkKind::EuropeToAmerica,
        LinkKind::SharedMarket,
        LinkKind::Disjoint,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Mutual => "mutual",
            LinkKind::EuropeToAmerica => "europe-america",
            LinkKind::SharedMarket => "shared-market",
            LinkKind::Disjoint => "disjoint",
        }
    }

    pub fn classify(a: &PairId, b: &PairId, markets: &[MarketMeta]) -> LinkKind {
        let eu_am = |p: &PairId| {
            markets[p.source].zone == Zone::Europe && markets[p.target].zone == Zone::America
        };
        if a.source == b.target && a.target == b.source {
            LinkKind::Mutual
        } else if eu_am(a) && eu_am(b) {
            LinkKind::EuropeToAmerica
        } else if a.shares_market(b) {
            LinkKind::SharedMarket
        } else {
            LinkKind::Disjoint
        }
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairEdge {
    pub a: PairId,
    pub b: PairId,
    pub correlation: f64,
    /// |C|.
    pub weight: f64,
    pub kind: LinkKind,
    /// |C| fell below the discard band rather than above it.
    pub low_band: bool,
}

impl PairEdge {
    pub fn tags(&self) -> Vec<String> {
        let mut tags = vec![self.kind.as_str().to_string()];
        if self.low_band {
            tags.push("low-band".into());
        }
        tags
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGraph {
    pub nodes: Vec<PairId>,
    pub edges: Vec<PairEdge>,
    pub filter: PairFilter,
}

impl PairGraph {
    pub fn count_kind(&self, kind: LinkKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }
}

/// Links pairs whose |C| passes `filter` (default: outside μ_C ± σ_C).
pub fn influential_pair_network(
    corr: &PairCorrMatrix,
    markets: &[MarketMeta],
    filter: Option<PairFilter>,
) -> PairGraph {
    let filter = filter.unwrap_or_else(|| PairFilter::one_sigma_band(corr));
    let n = corr.size();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let Some(c) = corr.get(i, j) else { continue };
            let weight = c.abs();
            if filter.keeps(weight) {
                let (a, b) = (corr.pairs[i], corr.pairs[j]);
                edges.push(PairEdge {
                    a,
                    b,
                    correlation: c,
                    weight,
                    kind: LinkKind::classify(&a, &b, markets),
                    low_band: filter.below(weight),
                });
            }
        }
    }
    PairGraph {
        nodes: corr.pairs.clone(),
        edges,
        filter,
    }
}
