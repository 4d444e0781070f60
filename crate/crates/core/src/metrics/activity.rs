use ndarray::Array2;

use super::scalar::mean_std;
use crate::error::{Error, Result};
use crate::te::TeMatrixSeries;

/// Per ordered pair: time mean (`a_str`) and population time standard
/// deviation (`a_flu`) of the pair's TE across segments. Flagged cells are
/// skipped for their pair; the diagonal is NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityStats {
    pub a_str: Array2<f64>,
    pub a_flu: Array2<f64>,
    /// Mean of all valid off-diagonal `a_str` entries.
    pub grand_mean: f64,
}

impl ActivityStats {
    pub fn n_markets(&self) -> usize {
        self.a_str.nrows()
    }

    pub fn strength(&self, source: usize, target: usize) -> Option<f64> {
        let v = self.a_str[[source, target]];
        (source != target && v.is_finite()).then_some(v)
    }
}

pub fn activity(series: &TeMatrixSeries) -> Result<ActivityStats> {
    let w = series.len();
    if w < 2 {
        return Err(Error::InsufficientData(format!(
            "activity fluctuation needs at least 2 segments, got {w}"
        )));
    }
    let m = series.n_markets();
    let mut a_str = Array2::from_elem((m, m), f64::NAN);
    let mut a_flu = Array2::from_elem((m, m), f64::NAN);
    let mut strengths = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let values: Vec<f64> = series
                .pair_series(i, j)
                .into_iter()
                .filter(|v| v.is_finite())
                .collect();
            if let Some((mean, std)) = mean_std(&values) {
                a_str[[i, j]] = mean;
                a_flu[[i, j]] = std;
                strengths.push(mean);
            }
        }
    }
    let (grand_mean, _) = mean_std(&strengths)
        .ok_or_else(|| Error::InsufficientData("no valid pair in any segment".into()))?;
    Ok(ActivityStats {
        a_str,
        a_flu,
        grand_mean,
    })
}
