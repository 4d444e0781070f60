//! Scalar diagnostics of a TE-matrix series and the trend/peak analysis.

mod activity;
mod peaks;
mod scalar;
mod trend;

pub use activity::{activity, ActivityStats};
pub use peaks::{
    detect_peaks, local_maxima, CrisisCalendar, CrisisEvent, Peak, PeakMatch, PeakReport,
    DEFAULT_MAX_LEAD_MONTHS,
};
pub use scalar::{
    asi_series, asymmetry, average_influence, avi_series, mean_std, pearson, shifted_mean, MetricKind,
    MetricSeries,
};
pub use trend::{lowpass, lowpass_trend, DEFAULT_CUTOFF_MONTHS};
