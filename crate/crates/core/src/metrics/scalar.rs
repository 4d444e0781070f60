use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::te::{TeMatrix, TeMatrixSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Avi,
    Asi,
    Trend,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Avi => "avi",
            MetricKind::Asi => "asi",
            MetricKind::Trend => "trend",
        })
    }
}

/// One value per segment, stamped with the segment's end date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub kind: MetricKind,
    pub segment_end_dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl MetricSeries {
    pub fn new(kind: MetricKind, segment_end_dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if segment_end_dates.len() != values.len() {
            return Err(Error::Domain(format!(
                "{} dates for {} values",
                segment_end_dates.len(),
                values.len()
            )));
        }
        Ok(Self {
            kind,
            segment_end_dates,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// (min, max) of the finite values.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold(None, |acc, &v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }

    /// `end_date,value` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("end_date,value\n");
        for (d, v) in self.segment_end_dates.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", d.format("%Y-%m-%d"), v));
        }
        out
    }
}

/// Mean of the valid off-diagonal entries.
pub fn average_influence(m: &TeMatrix) -> Result<f64> {
    let values: Vec<f64> = m.off_diagonal().map(|(_, _, v)| v).collect();
    shifted_mean(&values).ok_or_else(|| {
        Error::InsufficientData(format!("segment {} has no valid cells", m.segment_index))
    })
}

/// Σ_{m>n} |TE(m,n) − TE(n,m)| / Σ_{m>n} (TE(m,n) + TE(n,m)), over pairs
/// where both directions are valid.
pub fn asymmetry(m: &TeMatrix) -> Result<f64> {
    let k = m.n_markets();
    let mut diff = 0.0;
    let mut total = 0.0;
    let mut pairs = 0;
    for i in 0..k {
        for j in 0..i {
            if let (Some(a), Some(b)) = (m.get(i, j), m.get(j, i)) {
                diff += (a - b).abs();
                total += a + b;
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        return Err(Error::InsufficientData(format!(
            "segment {} has no pair valid in both directions",
            m.segment_index
        )));
    }
    if total <= 0.0 {
        return Err(Error::UndefinedMetric(format!(
            "segment {}: asymmetry denominator is zero",
            m.segment_index
        )));
    }
    Ok(diff / total)
}

fn per_segment(
    series: &TeMatrixSeries,
    kind: MetricKind,
    f: fn(&TeMatrix) -> Result<f64>,
) -> Result<MetricSeries> {
    let values = series
        .matrices
        .iter()
        .map(|m| {
            f(m).map_err(|e| Error::Segment {
                segment: m.segment_index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    MetricSeries::new(kind, series.end_dates(), values)
}

pub fn avi_series(series: &TeMatrixSeries) -> Result<MetricSeries> {
    per_segment(series, MetricKind::Avi, average_influence)
}

pub fn asi_series(series: &TeMatrixSeries) -> Result<MetricSeries> {
    per_segment(series, MetricKind::Asi, asymmetry)
}

/// Pearson correlation; `None` when either side has zero variance or lengths differ.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let ma = shifted_mean(a)?;
    let mb = shifted_mean(b)?;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Arithmetic mean taken as an offset from the first value, so a run of
/// identical values returns that value exactly.
pub fn shifted_mean(values: &[f64]) -> Option<f64> {
    let first = *values.first()?;
    let n = values.len() as f64;
    Some(first + values.iter().map(|v| v - first).sum::<f64>() / n)
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    let mean = shifted_mean(values)?;
    let n = values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn matrix(values: Array2<f64>) -> TeMatrix {
        TeMatrix {
            segment_index: 1,
            end_date: NaiveDate::from_ymd_opt(2000, 1, 31).unwrap(),
            values,
        }
    }

    const N: f64 = f64::NAN;

    #[test]
    fn avi_of_constant_matrix() {
        let m = matrix(array![[N, 0.3, 0.3], [0.3, N, 0.3], [0.3, 0.3, N]]);
        assert!((average_influence(&m).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn avi_two_markets() {
        let m = matrix(array![[N, 0.1], [0.3, N]]);
        assert!((average_influence(&m).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn avi_skips_flagged_cells() {
        let m = matrix(array![[N, 0.1, N], [0.3, N, 0.2], [0.6, 0.4, N]]);
        assert!((average_influence(&m).unwrap() - 0.32).abs() < 1e-15);
        let empty = matrix(Array2::from_elem((2, 2), N));
        assert!(matches!(average_influence(&empty), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn asi_symmetric_and_one_way() {
        let sym = matrix(array![[N, 0.2, 0.4], [0.2, N, 0.1], [0.4, 0.1, N]]);
        assert_eq!(asymmetry(&sym).unwrap(), 0.0);
        let one_way = matrix(array![[N, 0.7], [0.0, N]]);
        assert_eq!(asymmetry(&one_way).unwrap(), 1.0);
        let zero = matrix(array![[N, 0.0], [0.0, N]]);
        assert!(matches!(asymmetry(&zero), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn pearson_basics() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), Some(1.0));
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
    }

    #[test]
    fn csv_export() {
        let s = MetricSeries::new(
            MetricKind::Avi,
            vec![NaiveDate::from_ymd_opt(1993, 1, 29).unwrap()],
            vec![0.25],
        )
        .unwrap();
        assert_eq!(s.to_csv(), "end_date,value\n1993-01-29,0.25\n");
        assert_eq!(s.range(), Some((0.25, 0.25)));
    }
}
