//! Fixtures shared by the criterion benches.

use robustperiod::{SyntheticSpec, TimeSeries};

/// Three-period sine fixture of `length` samples at the given noise level.
pub fn fixture(length: usize, noise_variance: f64, outlier_ratio: f64, seed: u64) -> TimeSeries {
    let spec = SyntheticSpec {
        length,
        noise_variance,
        outlier_ratio,
        seed,
        ..SyntheticSpec::default()
    };
    robustperiod::synthbench::generate(&spec).expect("valid fixture spec")
}
