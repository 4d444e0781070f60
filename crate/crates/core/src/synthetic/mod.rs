//! Panels with planted lag-1 causal structure, and the directionality benchmark on them.

mod benchmark;
mod var;

pub use benchmark::{
    binomial_acceptance, detection_rate, directionality_benchmark, DirectionalityReport,
    PairDetection,
};
pub use var::{
    generate_var_prices, generate_var_returns, synthetic_calendar, CouplingSpec, BURN_IN,
    MIN_LENGTH, TRADING_DAYS_PER_MONTH,
};
