//! Normalization, Hodrick–Prescott detrending and coarse outlier clipping.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::series::TimeSeries;
use crate::stats;

/// Settings for the preprocessing stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// HP smoothing parameter on the standardized series, expressed on a unit
    /// time axis. The discrete penalty weight used for a series of length `n`
    /// is `hp_lambda * n^4` (see [`PreprocessConfig::discrete_lambda`]).
    pub hp_lambda: f64,
    /// Clipping bound in median/MAD units.
    pub clip_c: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            hp_lambda: 1e-6,
            clip_c: 3.0,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.hp_lambda >= 0.0) || !self.hp_lambda.is_finite() {
            return Err(invalid("hp_lambda", "must be finite and >= 0"));
        }
        if !(self.clip_c > 0.0) || !self.clip_c.is_finite() {
            return Err(invalid("clip_c", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Penalty weight for the index-spaced second differences of a length-`n`
    /// series. Rescaling the time axis to `[0, 1)` turns each second
    /// difference into `n^2` times a curvature, so the weight grows as `n^4`
    /// and the filter's cutoff stays at a fixed fraction of the series length.
    pub fn discrete_lambda(&self, n: usize) -> f64 {
        let n = n as f64;
        self.hp_lambda * n * n * n * n
    }
}

/// Output of [`standardize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub series: TimeSeries,
    pub mean: f64,
    pub std: f64,
    /// Set when the input had zero spread; `series` is then all zeros.
    pub degenerate: bool,
}

/// Centers by the sample mean and scales by the sample standard deviation.
pub fn standardize(series: &TimeSeries) -> Standardized {
    let xs = series.values();
    let mean = stats::mean(xs);
    let std = stats::sample_variance(xs).sqrt();
    if !(std > 0.0) {
        return Standardized {
            series: series.derive(vec![0.0; xs.len()]),
            mean,
            std: 0.0,
            degenerate: true,
        };
    }
    let values = xs.iter().map(|x| (x - mean) / std).collect();
    Standardized {
        series: series.derive(values),
        mean,
        std,
        degenerate: false,
    }
}

/// Hodrick–Prescott trend: the minimizer of
/// `1/2 Σ (y_t - τ_t)^2 + λ Σ (τ_{t-1} - 2τ_t + τ_{t+1})^2`, i.e. the solution
/// of `(I + 2λ DᵀD) τ = y` with `D` the second-difference operator.
///
/// Solved in `O(n)` through the equivalent form `τ = y - Dᵀ s`,
/// `(I / 2λ + D Dᵀ) s = D y`, whose pentadiagonal Toeplitz matrix stays well
/// conditioned as `λ → ∞`.
pub fn hp_trend(series: &TimeSeries, lambda: f64) -> Result<TimeSeries> {
    let y = series.values();
    let n = y.len();
    if n < 3 {
        return Err(invalid(
            "series",
            format!("HP filter needs at least 3 samples, got {n}"),
        ));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", "must be finite and >= 0"));
    }
    if lambda == 0.0 {
        return Ok(series.derive(y.to_vec()));
    }
    let m = n - 2;
    let d0 = vec![6.0 + 0.5 / lambda; m];
    let d1 = vec![-4.0; m.saturating_sub(1)];
    let d2 = vec![1.0; m.saturating_sub(2)];
    let dy: Vec<f64> = y.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
    let s = solve_symmetric_pentadiagonal(&d0, &d1, &d2, &dy);
    let mut trend = y.to_vec();
    for (r, sr) in s.iter().enumerate() {
        trend[r] -= sr;
        trend[r + 1] += 2.0 * sr;
        trend[r + 2] -= sr;
    }
    Ok(series.derive(trend))
}

/// Banded `L D Lᵀ` solve for a symmetric positive-definite pentadiagonal matrix.
fn solve_symmetric_pentadiagonal(d0: &[f64], d1: &[f64], d2: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = d0.len();
    // l1[i] = L[i][i-1], l2[i] = L[i][i-2]
    let mut l1 = vec![0.0; n];
    let mut l2 = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        if i >= 2 {
            l2[i] = d2[i - 2] / d[i - 2];
        }
        if i >= 1 {
            let mut a = d1[i - 1];
            if i >= 2 {
                a -= l2[i] * l1[i - 1] * d[i - 2];
            }
            l1[i] = a / d[i - 1];
        }
        let mut di = d0[i];
        if i >= 1 {
            di -= l1[i] * l1[i] * d[i - 1];
        }
        if i >= 2 {
            di -= l2[i] * l2[i] * d[i - 2];
        }
        d[i] = di;
    }

    let mut x = rhs.to_vec();
    for i in 0..n {
        if i >= 1 {
            x[i] -= l1[i] * x[i - 1];
        }
        if i >= 2 {
            x[i] -= l2[i] * x[i - 2];
        }
    }
    for (xi, di) in x.iter_mut().zip(&d) {
        *xi /= di;
    }
    for i in (0..n).rev() {
        if i + 1 < n {
            x[i] -= l1[i + 1] * x[i + 1];
        }
        if i + 2 < n {
            x[i] -= l2[i + 2] * x[i + 2];
        }
    }
    x
}

/// Output of [`clip_extremes`].
#[derive(Debug, Clone, PartialEq)]
pub struct Clipped {
    pub series: TimeSeries,
    pub median: f64,
    pub mad: f64,
    /// Set when the MAD is zero; `series` is then all zeros.
    pub degenerate: bool,
}

/// Robustly rescales by median and raw MAD, then clips to `[-c, c]`.
pub fn clip_extremes(series: &TimeSeries, c: f64) -> Result<Clipped> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid("clip_c", "must be finite and > 0"));
    }
    let xs = series.values();
    let (median, mad) = stats::median_mad(xs);
    if !(mad > 0.0) {
        return Ok(Clipped {
            series: series.derive(vec![0.0; xs.len()]),
            median,
            mad: 0.0,
            degenerate: true,
        });
    }
    let values = xs
        .iter()
        .map(|x| ((x - median) / mad).clamp(-c, c))
        .collect();
    Ok(Clipped {
        series: series.derive(values),
        median,
        mad,
        degenerate: false,
    })
}

/// Output of [`preprocess`].
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    /// Detrended, clipped series in median/MAD units, bounded by `clip_c`.
    pub series: TimeSeries,
    /// HP trend of the standardized input.
    pub trend: Vec<f64>,
    pub degenerate: bool,
}

/// standardize → HP trend → subtract → clip.
pub fn preprocess(series: &TimeSeries, cfg: &PreprocessConfig) -> Result<Preprocessed> {
    cfg.validate()?;
    let n = series.len();
    let std = standardize(series);
    if std.degenerate {
        return Ok(Preprocessed {
            series: std.series,
            trend: vec![0.0; n],
            degenerate: true,
        });
    }
    let trend = hp_trend(&std.series, cfg.discrete_lambda(n))?.into_values();
    let detrended: Vec<f64> = std
        .series
        .values()
        .iter()
        .zip(&trend)
        .map(|(y, t)| y - t)
        .collect();
    let clipped = clip_extremes(&series.derive(detrended), cfg.clip_c)?;
    Ok(Preprocessed {
        series: clipped.series,
        trend,
        degenerate: clipped.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_xoshiro::rand_core::{RngCore, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn ts(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new(v).unwrap()
    }

    fn uniform_series(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        (0..n)
            .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
            .collect()
    }

    // Dense Gaussian elimination with partial pivoting on the explicitly
    // assembled normal equations.
    #[allow(clippy::needless_range_loop)]
    fn dense_hp(y: &[f64], lambda: f64) -> Vec<f64> {
        let n = y.len();
        let mut dmat = vec![vec![0.0; n]; n - 2];
        for (r, row) in dmat.iter_mut().enumerate() {
            row[r] = 1.0;
            row[r + 1] = -2.0;
            row[r + 2] = 1.0;
        }
        let mut a = vec![vec![0.0; n + 1]; n];
        for i in 0..n {
            for j in 0..n {
                let dtd: f64 = (0..n - 2).map(|r| dmat[r][i] * dmat[r][j]).sum();
                a[i][j] = if i == j { 1.0 } else { 0.0 } + 2.0 * lambda * dtd;
            }
            a[i][n] = y[i];
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
                .unwrap();
            a.swap(col, piv);
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (a[i][n] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn standardize_affine_parameters() {
        let out = standardize(&ts(vec![1.0, 2.0, 3.0]));
        assert_eq!(out.mean, 2.0);
        assert_eq!(out.std, 1.0);
        assert_eq!(out.series.values(), &[-1.0, 0.0, 1.0]);
        assert!(!out.degenerate);
    }

    #[test]
    fn standardize_constant_is_degenerate() {
        let out = standardize(&ts(vec![5.0, 5.0, 5.0]));
        assert!(out.degenerate);
        assert_eq!(out.std, 0.0);
        assert_eq!(out.series.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn standardize_is_idempotent() {
        let s = ts(uniform_series(3, 100));
        let once = standardize(&s).series;
        let twice = standardize(&once).series;
        for (a, b) in once.values().iter().zip(twice.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hp_lambda_zero_is_identity() {
        let y = uniform_series(1, 50);
        let t = hp_trend(&ts(y.clone()), 0.0).unwrap();
        assert_eq!(t.values(), y.as_slice());
    }

    #[test]
    fn hp_keeps_lines_exactly() {
        let y: Vec<f64> = (0..200).map(|t| 3.5 - 0.25 * t as f64).collect();
        for lambda in [1.0, 1e3, 1e6] {
            let t = hp_trend(&ts(y.clone()), lambda).unwrap();
            let err = t
                .values()
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "lambda {lambda}: err {err}");
        }
    }

    #[test]
    fn hp_banded_matches_dense_oracle() {
        let y = uniform_series(7, 200);
        let banded = hp_trend(&ts(y.clone()), 1.0).unwrap();
        let dense = dense_hp(&y, 1.0);
        let err = banded
            .values()
            .iter()
            .zip(&dense)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "max abs err {err}");
    }

    #[test]
    fn hp_is_linear() {
        let y1 = uniform_series(11, 120);
        let y2 = uniform_series(12, 120);
        let (a, b) = (2.5, -0.75);
        let combo: Vec<f64> = y1.iter().zip(&y2).map(|(u, v)| a * u + b * v).collect();
        let lam = 50.0;
        let t1 = hp_trend(&ts(y1), lam).unwrap();
        let t2 = hp_trend(&ts(y2), lam).unwrap();
        let tc = hp_trend(&ts(combo), lam).unwrap();
        for i in 0..120 {
            let expect = a * t1.values()[i] + b * t2.values()[i];
            assert!((tc.values()[i] - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn hp_large_lambda_approaches_ols_line() {
        let n = 100;
        let noise = uniform_series(5, n);
        let y: Vec<f64> = (0..n)
            .map(|t| 1.0 + 0.05 * t as f64 + 0.3 * noise[t])
            .collect();
        let tbar = (n - 1) as f64 / 2.0;
        let ybar = stats::mean(&y);
        let sxy: f64 = (0..n).map(|t| (t as f64 - tbar) * (y[t] - ybar)).sum();
        let sxx: f64 = (0..n).map(|t| (t as f64 - tbar).powi(2)).sum();
        let slope = sxy / sxx;
        let trend = hp_trend(&ts(y.clone()), 1e12).unwrap();
        for t in 0..n {
            let ols = ybar + slope * (t as f64 - tbar);
            assert!((trend.values()[t] - ols).abs() < 1e-3, "t={t}");
        }
    }

    #[test]
    fn hp_rejects_short_series() {
        assert!(hp_trend(&ts(vec![1.0, 2.0]), 1.0).is_err());
        assert!(hp_trend(&ts(vec![1.0, 2.0, 3.0]), -1.0).is_err());
    }

    #[test]
    fn clip_hand_example() {
        let out = clip_extremes(&ts(vec![1.0, 2.0, 3.0, 4.0, 100.0]), 3.0).unwrap();
        assert_eq!(out.median, 3.0);
        assert_eq!(out.mad, 1.0);
        assert_eq!(out.series.values(), &[-2.0, -1.0, 0.0, 1.0, 3.0]);
    }

    #[test]
    fn clip_symmetric_unchanged() {
        let out = clip_extremes(&ts(vec![-1.0, 0.0, 1.0]), 3.0).unwrap();
        assert_eq!(out.series.values(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn clip_constant_is_degenerate_zeros() {
        let out = clip_extremes(&ts(vec![4.0; 6]), 3.0).unwrap();
        assert!(out.degenerate);
        assert!(out.series.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn clip_invariant_under_constant_shift() {
        let y = uniform_series(9, 64);
        let shifted: Vec<f64> = y.iter().map(|v| v + 123.0).collect();
        let a = clip_extremes(&ts(y), 2.0).unwrap();
        let b = clip_extremes(&ts(shifted), 2.0).unwrap();
        for (u, v) in a.series.values().iter().zip(b.series.values()) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn preprocess_removes_steep_ramp() {
        let n = 400;
        let wave: Vec<f64> = (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 25.0).sin())
            .collect();
        let ramp: Vec<f64> = wave
            .iter()
            .enumerate()
            .map(|(t, w)| w + 0.5 * t as f64)
            .collect();
        let cfg = PreprocessConfig::default();
        let control = preprocess(&ts(wave), &cfg).unwrap();
        let trended = preprocess(&ts(ramp), &cfg).unwrap();
        let mean_diff = |v: &[f64]| (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
        let c = mean_diff(control.series.values()).abs();
        let t = mean_diff(trended.series.values()).abs();
        assert!(t < 1e-2, "trend slope left: {t}");
        assert!((t - c).abs() < 1e-2);
    }

    #[test]
    fn preprocess_zero_series() {
        let out = preprocess(&ts(vec![0.0; 32]), &PreprocessConfig::default()).unwrap();
        assert!(out.degenerate);
        assert!(out.series.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn preprocess_output_is_bounded_and_deterministic() {
        let n = 500;
        let mut y: Vec<f64> = (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 40.0).sin())
            .collect();
        for t in (0..n).step_by(100) {
            y[t] += 5.0;
        }
        let cfg = PreprocessConfig::default();
        let a = preprocess(&ts(y.clone()), &cfg).unwrap();
        let b = preprocess(&ts(y), &cfg).unwrap();
        assert!(a.series.values().iter().all(|v| v.abs() <= cfg.clip_c));
        assert_eq!(a, b);
    }
}
