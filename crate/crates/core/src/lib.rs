//! Robust detection of multiple interlaced periodicities in noisy,
//! outlier-contaminated and trended univariate time series.
//!
//! The pipeline ([`robust_period`]) standardizes and detrends the series,
//! splits it into octave bands with a Daubechies MODWT, ranks the bands by
//! robust wavelet variance, and in each retained band tests a Huber
//! M-periodogram with Fisher's g-test. Candidates are confirmed against the
//! median peak spacing of an autocorrelation obtained from the same
//! periodogram.

// `!(x > 0.0)` style checks deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acf;
pub mod detector;
mod error;
mod filters;
pub mod modwt;
pub mod preprocess;
mod series;
pub mod spectral;
pub mod stats;
pub mod synthbench;

pub use detector::{
    detect, detect_level, merge_periods, robust_period, Detection, DetectorConfig, PeriodRecord,
    PeriodReport,
};
pub use error::{Error, Result};
pub use modwt::{WaveletDecomposition, WaveletFilterPair};
pub use preprocess::PreprocessConfig;
pub use series::TimeSeries;
pub use spectral::{AdmmConfig, FisherOutcome, HybridPeriodogram};
pub use synthbench::{Metrics, SyntheticSpec, Waveform};
