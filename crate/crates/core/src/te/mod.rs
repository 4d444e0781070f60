//! Plug-in transfer entropy between discretized return series, evaluated for
//! every ordered market pair of every calendar segment.

mod discretize;
mod entropy;
mod estimator;
mod io;
mod lag;
mod matrix;

pub use discretize::{discretize, BinningScheme, SymbolSeries, MAX_BINS};
pub use entropy::{conditional_entropy, conditional_entropy_miller_madow, ContingencyTable};
pub use estimator::{
    effective_samples, transfer_entropy, transfer_entropy_symbols, BiasCorrection, TeConfig,
    DEFAULT_BINS, DEFAULT_MIN_SAMPLES,
};
pub use io::{read_te_series, write_te_series};
pub use lag::{lag_for_pair, Lag, LagPolicy};
pub use matrix::{te_matrix, te_series, Provenance, TeMatrix, TeMatrixSeries};

