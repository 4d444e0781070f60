use chrono::NaiveDate;
use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::discretize::discretize;
use super::estimator::{effective_samples, transfer_entropy_symbols, TeConfig};
use super::lag::{lag_for_pair, Lag, LagPolicy};
use crate::error::{Error, Result};
use crate::market::{MarketMeta, SegmentSeries};
use crate::par::Execution;

/// One segment's network: `values[[m, n]]` is the influence of market `m` on
/// market `n`, in nats. The diagonal and flagged cells hold NaN.
#[derive(Debug, Clone)]
pub struct TeMatrix {
    pub segment_index: usize,
    pub end_date: NaiveDate,
    pub values: Array2<f64>,
}

impl PartialEq for TeMatrix {
    /// Bitwise on values so NaN cells compare equal.
    fn eq(&self, other: &Self) -> bool {
        self.segment_index == other.segment_index
            && self.end_date == other.end_date
            && self.values.dim() == other.values.dim()
            && self
                .values
                .iter()
                .zip(other.values.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl TeMatrix {
    pub fn n_markets(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, source: usize, target: usize) -> Option<f64> {
        let v = self.values[[source, target]];
        (source != target && v.is_finite()).then_some(v)
    }

    /// Valid off-diagonal cells as `(source, target, value)` in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.n_markets();
        (0..m)
            .flat_map(move |i| (0..m).map(move |j| (i, j)))
            .filter_map(|(i, j)| self.get(i, j).map(|v| (i, j, v)))
    }

    pub fn invalid_cells(&self) -> usize {
        let m = self.n_markets();
        m * m.saturating_sub(1) - self.off_diagonal().count()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            values: self.values.mapv(|v| v * k),
            ..self.clone()
        }
    }
}

/// Settings a series was computed with.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub te: TeConfig,
    pub lag_policy: LagPolicy,
    pub window_months: usize,
    pub step_months: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeMatrixSeries {
    pub markets: Vec<MarketMeta>,
    pub matrices: Vec<TeMatrix>,
    pub provenance: Provenance,
}

impl TeMatrixSeries {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn n_markets(&self) -> usize {
        self.markets.len()
    }

    pub fn end_dates(&self) -> Vec<NaiveDate> {
        self.matrices.iter().map(|m| m.end_date).collect()
    }

    /// All valid off-diagonal values across segments, segment by segment.
    pub fn pooled_values(&self) -> Vec<f64> {
        self.matrices
            .iter()
            .flat_map(|m| m.off_diagonal().map(|(_, _, v)| v).collect::<Vec<_>>())
            .collect()
    }

    /// The time series of one ordered pair (NaN where flagged).
    pub fn pair_series(&self, source: usize, target: usize) -> Vec<f64> {
        self.matrices
            .iter()
            .map(|m| m.values[[source, target]])
            .collect()
    }
}

/// Off-diagonal ordered pairs of an M-market panel, row-major.
fn ordered_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .collect()
}

/// TE for every ordered pair of one segment view (rows = markets).
///
/// Each row is discretized once over the whole segment; a cell whose aligned
/// sample count falls below `config.min_samples` is left as NaN.
pub fn te_matrix(
    view: ArrayView2<'_, f64>,
    markets: &[MarketMeta],
    policy: &LagPolicy,
    config: &TeConfig,
    exec: Execution,
) -> Result<Array2<f64>> {
    config.validate()?;
    let (m, len) = view.dim();
    if m != markets.len() {
        return Err(Error::Domain(format!(
            "segment has {m} rows but {} markets were given",
            markets.len()
        )));
    }
    let mut values = Array2::from_elem((m, m), f64::NAN);
    let enough = [Lag::SameDay, Lag::PreviousDay]
        .iter()
        .any(|&lag| effective_samples(len, lag) >= config.min_samples);
    if !enough {
        return Ok(values);
    }
    let symbols = (0..m)
        .map(|i| {
            let row: Vec<f64> = view.row(i).to_vec();
            discretize(&row, config.bins, config.scheme)
        })
        .collect::<Result<Vec<_>>>()?;

    let pairs = ordered_pairs(m);
    let cells = exec.map(pairs.len(), |p| {
        let (i, j) = pairs[p];
        let lag = lag_for_pair(&markets[i], &markets[j], policy);
        match transfer_entropy_symbols(
            &symbols[i],
            &symbols[j],
            lag,
            config.min_samples,
            config.bias_correction,
        ) {
            Ok(v) => Ok(v),
            Err(Error::InsufficientData(_)) => Ok(f64::NAN),
            Err(e) => Err(e),
        }
    });
    for (&(i, j), cell) in pairs.iter().zip(cells) {
        values[[i, j]] = cell?;
    }
    Ok(values)
}

/// One [`TeMatrix`] per segment, in segment order.
pub fn te_series(
    segs: &SegmentSeries,
    policy: &LagPolicy,
    config: &TeConfig,
    exec: Execution,
) -> Result<TeMatrixSeries> {
    if segs.is_empty() {
        return Err(Error::InsufficientData("no segments to evaluate".into()));
    }
    let markets = segs.returns().markets();
    let results = exec.map(segs.len(), |k| {
        let seg = &segs.segments()[k];
        te_matrix(segs.view(seg), markets, policy, config, exec)
            .map(|values| TeMatrix {
                segment_index: seg.index,
                end_date: seg.end_date,
                values,
            })
            .map_err(|e| Error::Segment {
                segment: seg.index,
                source: Box::new(e),
            })
    });
    Ok(TeMatrixSeries {
        markets: markets.to_vec(),
        matrices: results.into_iter().collect::<Result<_>>()?,
        provenance: Provenance {
            te: *config,
            lag_policy: *policy,
            window_months: segs.window_months(),
            step_months: segs.step_months(),
        },
    })
}
