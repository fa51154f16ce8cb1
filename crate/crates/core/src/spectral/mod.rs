//! Periodograms of zero-padded wavelet coefficients: plain DFT power, the
//! Huber M-periodogram on a level's passband, and Fisher's test.

mod admm;
mod fisher;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{invalid, Result};
use crate::stats;

pub use admm::{
    admm_huber_fit, admm_huber_fit_traced, huber_loss, soft_threshold, AdmmConfig, AdmmFit,
};
pub use fisher::{fisher_g, fisher_pvalue, fisher_test, FisherG, FisherOutcome};

/// A series scaled to zero mean and unit (population) variance, followed by
/// as many zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Padded {
    pub values: Vec<f64>,
    /// Set when the input had no spread; `values` is then all zeros.
    pub degenerate: bool,
}

impl Padded {
    /// Length of the unpadded part.
    pub fn original_len(&self) -> usize {
        self.values.len() / 2
    }
}

pub fn zero_pad(w: &[f64]) -> Padded {
    let n = w.len();
    let mut values = vec![0.0; 2 * n];
    let mean = stats::mean(w);
    let var = w.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n.max(1) as f64;
    let std = var.sqrt();
    if !(std > 0.0) {
        return Padded {
            values,
            degenerate: true,
        };
    }
    for (dst, v) in values.iter_mut().zip(w) {
        *dst = (v - mean) / std;
    }
    Padded {
        values,
        degenerate: false,
    }
}

/// `P_k = |Σ_t x_t e^{-i2πkt/N'}|² / N'` for `k = 0..N'`.
pub fn vanilla_periodogram(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|c| c.norm_sqr() / n as f64).collect()
}

/// Half spectrum (`k = 0..N'/2`) mixing robust and plain bins.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPeriodogram {
    pub power: Vec<f64>,
    /// True where the bin came from the Huber fit.
    pub robust_mask: Vec<bool>,
    /// Inclusive robust band, if any bins were fitted robustly.
    pub band: Option<(usize, usize)>,
    pub padded_len: usize,
    /// Robust bins whose ADMM run hit the iteration cap.
    pub unconverged: usize,
}

impl HybridPeriodogram {
    /// Bins entering Fisher's test: `1..N`, excluding DC and Nyquist.
    pub fn test_range(&self) -> std::ops::Range<usize> {
        1..self.power.len()
    }
}

/// Inclusive frequency-index band `[⌈N'/2^{j+1}⌉, ⌊N'/2^j⌋]` for level `j`,
/// clipped to the non-degenerate bins `1..N'/2`.
pub fn level_band(padded_len: usize, level: usize) -> Option<(usize, usize)> {
    let half = padded_len / 2;
    if half < 2 {
        return None;
    }
    let lo_den = 1usize.checked_shl(level as u32 + 1)?;
    let lo = padded_len.div_ceil(lo_den).max(1);
    let hi = (padded_len >> level).min(half - 1);
    (lo <= hi).then_some((lo, hi))
}

/// Plain periodogram on every bin with DC zeroed (non-robust path).
pub fn vanilla_hybrid(x: &[f64]) -> Result<HybridPeriodogram> {
    check_padded(x)?;
    let half = x.len() / 2;
    let mut power = vanilla_periodogram(x);
    power.truncate(half);
    power[0] = 0.0;
    Ok(HybridPeriodogram {
        power,
        robust_mask: vec![false; half],
        band: None,
        padded_len: x.len(),
        unconverged: 0,
    })
}

/// Huber M-periodogram `P_k = (N'/4)|β̂(k)|²` on the level-`j` band, plain
/// periodogram elsewhere, DC set to zero.
pub fn huber_periodogram(x: &[f64], level: usize, cfg: &AdmmConfig) -> Result<HybridPeriodogram> {
    cfg.validate()?;
    let mut out = vanilla_hybrid(x)?;
    let Some((lo, hi)) = level_band(x.len(), level) else {
        return Ok(out);
    };
    let table = admm::HarmonicTable::new(x.len());
    let quarter = x.len() as f64 / 4.0;
    let fits: Vec<AdmmFit> = (lo..=hi)
        .into_par_iter()
        .map(|k| admm::fit_with_table(x, k, cfg, &table, None))
        .collect();
    for (k, fit) in (lo..=hi).zip(&fits) {
        out.power[k] = quarter * fit.norm_sqr();
        out.robust_mask[k] = true;
    }
    out.unconverged = fits.iter().filter(|f| !f.converged).count();
    out.band = Some((lo, hi));
    Ok(out)
}

fn check_padded(x: &[f64]) -> Result<()> {
    if x.len() < 4 || !x.len().is_multiple_of(2) {
        return Err(invalid(
            "x",
            format!("padded series must have even length >= 4, got {}", x.len()),
        ));
    }
    Ok(())
}
