//! End-to-end multi-period detection: preprocess, decompose, rank levels,
//! test each level for a dominant period and validate it on the ACF.

use serde::{Deserialize, Serialize};

use crate::acf::{self, AcfSeries};
use crate::error::{invalid, Result};
use crate::modwt::{self, VarianceEstimator};
use crate::preprocess::{self, PreprocessConfig};
use crate::series::TimeSeries;
use crate::spectral::{self, AdmmConfig, FisherOutcome, HybridPeriodogram};

/// Shortest series accepted by [`robust_period`].
pub const MIN_SERIES_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub preprocess: PreprocessConfig,
    /// Daubechies order; 4 gives the 8-tap filter.
    pub wavelet_order: usize,
    /// Minimum fraction of total wavelet variance for a level to be examined.
    pub share_threshold: f64,
    pub admm: AdmmConfig,
    pub fisher_alpha: f64,
    /// Peak height threshold on the normalized ACF.
    pub acf_height: f64,
    pub acf_min_distance: usize,
    /// Relative gap below which periods from different levels are merged.
    pub merge_tolerance: f64,
    /// `false` switches to the non-robust variant: sample wavelet variance and
    /// plain periodogram throughout.
    pub robust_mode: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            preprocess: PreprocessConfig::default(),
            wavelet_order: 4,
            share_threshold: 0.05,
            admm: AdmmConfig::default(),
            fisher_alpha: 1e-10,
            acf_height: 0.5,
            acf_min_distance: 2,
            merge_tolerance: 0.03,
            robust_mode: true,
        }
    }
}

impl DetectorConfig {
    /// The non-robust ablation with otherwise identical settings.
    pub fn non_robust() -> Self {
        Self {
            robust_mode: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        self.admm.validate()?;
        if !(1..=10).contains(&self.wavelet_order) {
            return Err(invalid("wavelet_order", "must lie in 1..=10"));
        }
        if !(0.0..=1.0).contains(&self.share_threshold) {
            return Err(invalid("share_threshold", "must lie in [0, 1]"));
        }
        if !(self.fisher_alpha > 0.0 && self.fisher_alpha < 1.0) {
            return Err(invalid("fisher_alpha", "must lie in (0, 1)"));
        }
        if !(self.acf_height > 0.0 && self.acf_height < 1.0) {
            return Err(invalid("acf_height", "must lie in (0, 1)"));
        }
        if self.acf_min_distance == 0 {
            return Err(invalid("acf_min_distance", "must be >= 1"));
        }
        if !(self.merge_tolerance >= 0.0) {
            return Err(invalid("merge_tolerance", "must be >= 0"));
        }
        Ok(())
    }

    fn variance_estimator(&self) -> VarianceEstimator {
        if self.robust_mode {
            VarianceEstimator::Biweight
        } else {
            VarianceEstimator::Sample
        }
    }
}

/// One detected period with its supporting evidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub length: f64,
    pub level: usize,
    pub p_value: f64,
    pub variance_share: f64,
    pub acf_median_distance: f64,
}

/// Everything computed while examining one wavelet level.
#[derive(Debug, Clone)]
pub struct LevelAnalysis {
    pub level: usize,
    pub periodogram: HybridPeriodogram,
    pub fisher: FisherOutcome,
    /// Present only when Fisher's test rejected white noise.
    pub acf: Option<AcfSeries>,
    pub peaks: Vec<usize>,
    pub median_distance: Option<f64>,
    pub period: Option<f64>,
}

/// Runs the single-period test on one level's coefficients.
pub fn analyze_level(w: &[f64], level: usize, cfg: &DetectorConfig) -> Result<LevelAnalysis> {
    let n = w.len();
    let padded = spectral::zero_pad(w);
    let x = &padded.values;
    let periodogram = if cfg.robust_mode && !padded.degenerate {
        spectral::huber_periodogram(x, level, &cfg.admm)?
    } else {
        spectral::vanilla_hybrid(x)?
    };
    let fisher = spectral::fisher_test(
        &periodogram.power,
        periodogram.test_range(),
        cfg.fisher_alpha,
    );
    let mut out = LevelAnalysis {
        level,
        periodogram,
        fisher,
        acf: None,
        peaks: Vec::new(),
        median_distance: None,
        period: None,
    };
    if padded.degenerate || !fisher.significant {
        return Ok(out);
    }

    let full = acf::full_range_periodogram(&out.periodogram, x);
    let acf = acf::huber_acf(&full, n);
    if !acf.degenerate {
        out.peaks = acf::find_peaks(&acf, cfg.acf_height, cfg.acf_min_distance);
        out.median_distance = acf::median_peak_distance(&out.peaks);
        // the DFT behind k_star runs over the padded length
        out.period = acf::period_from_peaks(&out.peaks, fisher.k_star, x.len());
    }
    out.acf = Some(acf);
    Ok(out)
}

/// The validated period of one level, if any.
pub fn detect_level(
    w: &[f64],
    level: usize,
    variance_share: f64,
    cfg: &DetectorConfig,
) -> Result<Option<PeriodRecord>> {
    let a = analyze_level(w, level, cfg)?;
    Ok(a.period.map(|length| PeriodRecord {
        length,
        level,
        p_value: a.fisher.p_value,
        variance_share,
        acf_median_distance: length,
    }))
}

/// Collapses periods closer than `tolerance` (relative to the larger one),
/// keeping the record with the larger variance share. Sorted by length.
pub fn merge_periods(records: &[PeriodRecord], tolerance: f64) -> Vec<PeriodRecord> {
    let mut by_share: Vec<PeriodRecord> = records.to_vec();
    by_share.sort_by(|a, b| {
        b.variance_share
            .total_cmp(&a.variance_share)
            .then(a.level.cmp(&b.level))
    });
    let mut kept: Vec<PeriodRecord> = Vec::with_capacity(by_share.len());
    for r in by_share {
        let close = kept
            .iter()
            .any(|k| (k.length - r.length).abs() < tolerance * k.length.max(r.length));
        if !close {
            kept.push(r);
        }
    }
    kept.sort_by(|a, b| a.length.total_cmp(&b.length));
    kept
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub periods: Vec<PeriodRecord>,
    pub levels_examined: usize,
    pub degenerate: bool,
    pub config: DetectorConfig,
}

impl PeriodReport {
    pub fn lengths(&self) -> Vec<f64> {
        self.periods.iter().map(|p| p.length).collect()
    }
}

/// Full pipeline plus per-level intermediates.
#[derive(Debug, Clone)]
pub struct Detection {
    pub report: PeriodReport,
    pub preprocessed: Option<TimeSeries>,
    pub levels: Vec<LevelAnalysis>,
}

/// Detects all periods of `series`.
pub fn robust_period(series: &TimeSeries, cfg: &DetectorConfig) -> Result<PeriodReport> {
    Ok(detect(series, cfg)?.report)
}

/// As [`robust_period`], also returning every level's intermediate results.
pub fn detect(series: &TimeSeries, cfg: &DetectorConfig) -> Result<Detection> {
    cfg.validate()?;
    series.require_len(MIN_SERIES_LEN)?;

    let empty = |levels_examined| PeriodReport {
        periods: Vec::new(),
        levels_examined,
        degenerate: true,
        config: *cfg,
    };

    let pre = preprocess::preprocess(series, &cfg.preprocess)?;
    if pre.degenerate {
        return Ok(Detection {
            report: empty(0),
            preprocessed: Some(pre.series),
            levels: Vec::new(),
        });
    }

    let filters = modwt::daubechies_filters(cfg.wavelet_order)?;
    let depth = modwt::max_level(series.len(), filters.width())?;
    let mut decomp = modwt::modwt_decompose(&pre.series, &filters, depth)?;
    decomp.estimate_variances(cfg.variance_estimator());
    let ranked = modwt::rank_levels(&decomp, cfg.share_threshold);

    let mut levels = Vec::with_capacity(ranked.len());
    let mut records = Vec::new();
    for &j in &ranked {
        let lvl = decomp.level(j).expect("ranked level exists");
        let a = analyze_level(&lvl.coefficients, j, cfg)?;
        if let Some(length) = a.period {
            records.push(PeriodRecord {
                length,
                level: j,
                p_value: a.fisher.p_value,
                variance_share: lvl.share,
                acf_median_distance: length,
            });
        }
        levels.push(a);
    }

    Ok(Detection {
        report: PeriodReport {
            periods: merge_periods(&records, cfg.merge_tolerance),
            levels_examined: ranked.len(),
            degenerate: false,
            config: *cfg,
        },
        preprocessed: Some(pre.series),
        levels,
    })
}
