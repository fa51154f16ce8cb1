//! Autocorrelation recovered from the (robust) periodogram, peak picking and
//! resolution-range validation of the period candidate.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::spectral::HybridPeriodogram;

/// Mirrors a half spectrum over `0..2N`, filling the Nyquist bin from the
/// padded series itself.
pub fn full_range_periodogram(hybrid: &HybridPeriodogram, x: &[f64]) -> Vec<f64> {
    let n = hybrid.power.len();
    let np = 2 * n;
    debug_assert_eq!(x.len(), np);
    let mut full = vec![0.0; np];
    full[..n].copy_from_slice(&hybrid.power);
    let alternating: f64 = x.chunks_exact(2).map(|p| p[0] - p[1]).sum();
    full[n] = alternating * alternating / np as f64;
    for k in n + 1..np {
        full[k] = full[np - k];
    }
    full
}

/// `r_t = Σ_k P̄_k e^{i2πkt/N'}`, which for the plain periodogram of a
/// zero-padded series is its linear autocorrelation `Σ_n w_n w_{n+t}`.
pub fn autocorrelation_from_spectrum(full: &[f64]) -> Vec<f64> {
    let np = full.len();
    if np == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex<f64>> = full.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_inverse(np).process(&mut buf);
    let scale = buf[0].re.abs().max(f64::MIN_POSITIVE);
    debug_assert!(
        buf.iter().all(|c| c.im.abs() <= 1e-8 * scale),
        "spectrum is not real-symmetric"
    );
    buf.iter().map(|c| c.re).collect()
}

/// Unbiased autocorrelation at lags `0..N`, rescaled to 1 at lag 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfSeries {
    pub values: Vec<f64>,
    /// `r_t / ((N - t) r_0)` before rescaling (so lag 0 is `1/N`).
    pub raw: Vec<f64>,
    /// Largest lag considered for peaks.
    pub usable_lags: usize,
    pub degenerate: bool,
}

/// Huber-ACF of an `N`-sample series from its full-range periodogram.
pub fn huber_acf(full: &[f64], n: usize) -> AcfSeries {
    let usable_lags = n / 2;
    let r = autocorrelation_from_spectrum(full);
    let r0 = r.first().copied().unwrap_or(0.0);
    if !(r0 > 0.0) || n == 0 {
        return AcfSeries {
            values: vec![0.0; n],
            raw: vec![0.0; n],
            usable_lags,
            degenerate: true,
        };
    }
    let raw: Vec<f64> = (0..n).map(|t| r[t] / ((n - t) as f64 * r0)).collect();
    let values = (0..n)
        .map(|t| r[t] * n as f64 / ((n - t) as f64 * r0))
        .collect();
    AcfSeries {
        values,
        raw,
        usable_lags,
        degenerate: false,
    }
}

/// Local maxima at lags `1..=usable_lags` reaching `height`.
///
/// A plateau counts once, at its first lag, and only if it is followed by a
/// drop. Peaks closer than `min_distance` are thinned keeping the higher one
/// (the smaller lag on ties).
pub fn find_peaks(acf: &AcfSeries, height: f64, min_distance: usize) -> Vec<usize> {
    let v = &acf.values;
    let last = acf.usable_lags.min(v.len().saturating_sub(1));
    let mut peaks = Vec::new();
    let mut t = 1;
    while t <= last {
        if v[t] > v[t - 1] {
            let mut end = t;
            while end + 1 < v.len() && v[end + 1] == v[t] {
                end += 1;
            }
            let falls = end + 1 >= v.len() || v[end + 1] < v[t];
            if falls && v[t] >= height {
                peaks.push(t);
            }
            t = end + 1;
        } else {
            t += 1;
        }
    }
    if min_distance > 1 && peaks.len() > 1 {
        peaks = thin_peaks(v, peaks, min_distance);
    }
    peaks
}

fn thin_peaks(v: &[f64], peaks: Vec<usize>, min_distance: usize) -> Vec<usize> {
    let mut order = peaks.clone();
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::with_capacity(peaks.len());
    for p in order {
        if kept.iter().all(|&q| q.abs_diff(p) >= min_distance) {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    kept
}

/// Acceptance interval for a period whose periodogram peak sits at bin `k`
/// of an `n`-point DFT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationRange {
    pub k: usize,
    pub lo: f64,
    pub hi: f64,
}

impl ValidationRange {
    /// `None` for `k = 0`. At `k = 1` the upper bound is `n + 1`.
    pub fn new(k: usize, n: usize) -> Option<Self> {
        if k == 0 {
            return None;
        }
        let nf = n as f64;
        let kf = k as f64;
        let lo = 0.5 * (nf / (kf + 1.0) + nf / kf) - 1.0;
        let hi = if k == 1 {
            nf + 1.0
        } else {
            0.5 * (nf / kf + nf / (kf - 1.0)) + 1.0
        };
        Some(Self { k, lo, hi })
    }

    pub fn contains(&self, period: f64) -> bool {
        period >= self.lo && period <= self.hi
    }
}

/// Median spacing of consecutive peak lags; the mean of the two central
/// values for an even count.
pub fn median_peak_distance(peaks: &[usize]) -> Option<f64> {
    if peaks.len() < 2 {
        return None;
    }
    let gaps: Vec<f64> = peaks.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    Some(crate::stats::median(&gaps))
}

/// Median peak distance, if it falls inside the validation range of `k_star`.
pub fn period_from_peaks(peaks: &[usize], k_star: usize, n: usize) -> Option<f64> {
    let median = median_peak_distance(peaks)?;
    let range = ValidationRange::new(k_star, n)?;
    range.contains(median).then_some(median)
}
