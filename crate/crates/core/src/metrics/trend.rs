use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::scalar::{MetricKind, MetricSeries};
use crate::error::{Error, Result};

pub const DEFAULT_CUTOFF_MONTHS: usize = 12;

/// Hard spectral low-pass: removes every Fourier component whose period (in
/// samples) is shorter than `cutoff`, keeping the mean.
pub fn lowpass(values: &[f64], cutoff: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 4 {
        return Err(Error::InsufficientData(format!(
            "trend filter needs at least 4 values, got {n}"
        )));
    }
    if cutoff < 2 {
        return Err(Error::Config(format!(
            "cutoff period {cutoff} is below the 2-sample resolution limit"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("trend input contains non-finite values".into()));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v - mean, 0.0)).collect();

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = k.min(n - k);
        // period n/freq is shorter than cutoff
        if freq * cutoff > n {
            *c = Complex::new(0.0, 0.0);
        }
    }
    buf[0] = Complex::new(0.0, 0.0);
    planner.plan_fft_inverse(n).process(&mut buf);

    let scale = 1.0 / n as f64;
    Ok(buf.iter().map(|c| c.re * scale + mean).collect())
}

/// [`lowpass`] applied to a metric series; `cutoff_months` is in segments,
/// which are one month apart under the default monthly step.
pub fn lowpass_trend(s: &MetricSeries, cutoff_months: usize) -> Result<MetricSeries> {
    let values = lowpass(&s.values, cutoff_months)?;
    MetricSeries::new(MetricKind::Trend, s.segment_end_dates.clone(), values)
}
