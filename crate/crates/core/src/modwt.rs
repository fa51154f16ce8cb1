//! Maximal overlap discrete wavelet transform (MODWT) and robust wavelet
//! variance used to locate and rank candidate periodic bands.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters;
use crate::series::TimeSeries;
use crate::stats;

/// Unit-level MODWT wavelet (`h`) and scaling (`g`) filters.
///
/// Both are the orthonormal DWT filters divided by `sqrt(2)`, so that
/// `Σ g = 1`, `Σ h = 0` and `Σ g² = Σ h² = 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilterPair {
    pub wavelet: Vec<f64>,
    pub scaling: Vec<f64>,
    pub order: usize,
}

impl WaveletFilterPair {
    /// Unit-level tap count `L1`.
    pub fn width(&self) -> usize {
        self.scaling.len()
    }
}

/// Daubechies extremal-phase filters of the given order (`2 * order` taps).
pub fn daubechies_filters(order: usize) -> Result<WaveletFilterPair> {
    let dwt = filters::scaling_coefficients(order).ok_or(Error::UnsupportedOrder(order))?;
    let l = dwt.len();
    let scaling: Vec<f64> = dwt.iter().map(|g| g / std::f64::consts::SQRT_2).collect();
    // quadrature mirror: h_l = (-1)^l g_{L-1-l}
    let wavelet = (0..l)
        .map(|i| {
            let g = scaling[l - 1 - i];
            if i % 2 == 0 {
                g
            } else {
                -g
            }
        })
        .collect();
    Ok(WaveletFilterPair {
        wavelet,
        scaling,
        order,
    })
}

/// Width of the equivalent level-`level` filter: `(2^j - 1)(L1 - 1) + 1`.
pub fn filter_width(level: usize, l1: usize) -> usize {
    ((1usize << level) - 1) * (l1 - 1) + 1
}

/// Deepest level whose equivalent filter fits in `n` samples, capped at
/// `floor(log2 n) - 1`.
pub fn max_level(n: usize, l1: usize) -> Result<usize> {
    if l1 < 2 || n < l1 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("series length {n} is shorter than the filter width {l1}"),
        });
    }
    let cap = (usize::BITS - 1 - n.leading_zeros()) as usize - 1;
    let mut j = 0;
    while j < cap && filter_width(j + 1, l1) <= n {
        j += 1;
    }
    if j == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("series length {n} admits no decomposition level"),
        });
    }
    Ok(j)
}

/// How per-level wavelet variance is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceEstimator {
    /// Biweight midvariance of the nonboundary coefficients.
    Biweight,
    /// Plain sample variance of the nonboundary coefficients.
    Sample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletLevel {
    /// 1-based level index `j`; the nominal period band is `[2^j, 2^{j+1}]`.
    pub level: usize,
    pub coefficients: Vec<f64>,
    /// Equivalent filter width `L_j`.
    pub width: usize,
    /// `None` when too few nonboundary coefficients remain.
    pub variance: Option<f64>,
    /// Variance as a fraction of the summed level variances.
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    pub levels: Vec<WaveletLevel>,
    /// Scaling coefficients of the deepest level.
    pub scaling: Vec<f64>,
    pub len: usize,
}

impl WaveletDecomposition {
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, j: usize) -> Option<&WaveletLevel> {
        j.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    /// Fills per-level variances and shares.
    pub fn estimate_variances(&mut self, estimator: VarianceEstimator) {
        for lvl in &mut self.levels {
            lvl.variance = match estimator {
                VarianceEstimator::Biweight => biweight_midvariance(&lvl.coefficients, lvl.width),
                VarianceEstimator::Sample => {
                    nonboundary(&lvl.coefficients, lvl.width).map(stats::sample_variance)
                }
            };
        }
        let total: f64 = self.levels.iter().filter_map(|l| l.variance).sum();
        for lvl in &mut self.levels {
            lvl.share = match lvl.variance {
                Some(v) if total > 0.0 => v / total,
                _ => 0.0,
            };
        }
    }
}

/// MODWT via the pyramid algorithm with circular boundary handling.
///
/// At level `j` the unit-level filters are applied to the previous scaling
/// coefficients with taps spaced `2^{j-1}` apart.
pub fn modwt_decompose(
    series: &TimeSeries,
    filters: &WaveletFilterPair,
    depth: usize,
) -> Result<WaveletDecomposition> {
    let n = series.len();
    let l1 = filters.width();
    let max = max_level(n, l1)?;
    if depth == 0 || depth > max {
        return Err(Error::LevelTooHigh {
            requested: depth,
            max,
            len: n,
        });
    }

    let mut v = series.values().to_vec();
    let mut levels = Vec::with_capacity(depth);
    let mut w_next = vec![0.0; n];
    let mut v_next = vec![0.0; n];
    for j in 1..=depth {
        let stride = (1usize << (j - 1)) % n;
        for t in 0..n {
            let mut wa = 0.0;
            let mut va = 0.0;
            let mut idx = t;
            for (h, g) in filters.wavelet.iter().zip(&filters.scaling) {
                wa += h * v[idx];
                va += g * v[idx];
                idx = if idx >= stride {
                    idx - stride
                } else {
                    idx + n - stride
                };
            }
            w_next[t] = wa;
            v_next[t] = va;
        }
        std::mem::swap(&mut v, &mut v_next);
        levels.push(WaveletLevel {
            level: j,
            coefficients: w_next.clone(),
            width: filter_width(j, l1),
            variance: None,
            share: 0.0,
        });
    }
    Ok(WaveletDecomposition {
        levels,
        scaling: v,
        len: n,
    })
}

fn nonboundary(w: &[f64], width: usize) -> Option<&[f64]> {
    let start = width.checked_sub(1)?;
    (w.len() >= start + 4).then(|| &w[start..])
}

/// Biweight midvariance over the nonboundary coefficients `t >= L_j - 1`.
///
/// Uses `u_t = (w_t - Med) / (9 MAD)` with the raw MAD. Returns `None` if
/// fewer than four nonboundary coefficients exist and `Some(0.0)` if the MAD
/// vanishes.
pub fn biweight_midvariance(w: &[f64], width: usize) -> Option<f64> {
    let xs = nonboundary(w, width)?;
    let (med, mad) = stats::median_mad(xs);
    if !(mad > 0.0) {
        return Some(0.0);
    }
    let scale = 9.0 * mad;
    let mut num = 0.0;
    let mut den = 0.0;
    for &x in xs {
        let d = x - med;
        let u = d / scale;
        let u2 = u * u;
        if u2 < 1.0 {
            let a = 1.0 - u2;
            num += d * d * a.powi(4);
            den += a * (1.0 - 5.0 * u2);
        }
    }
    if den == 0.0 {
        return Some(0.0);
    }
    Some(xs.len() as f64 * num / (den * den))
}

/// Levels ordered by descending variance, keeping those whose share reaches
/// `share_threshold`.
pub fn rank_levels(decomp: &WaveletDecomposition, share_threshold: f64) -> Vec<usize> {
    let mut ranked: Vec<&WaveletLevel> = decomp
        .levels
        .iter()
        .filter(|l| matches!(l.variance, Some(v) if v > 0.0) && l.share >= share_threshold)
        .collect();
    ranked.sort_by(|a, b| {
        b.variance
            .unwrap_or(0.0)
            .total_cmp(&a.variance.unwrap_or(0.0))
            .then(a.level.cmp(&b.level))
    });
    ranked.into_iter().map(|l| l.level).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_xoshiro::rand_core::{RngCore, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;
    use std::f64::consts::PI;

    fn uniforms(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        (0..n)
            .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
            .collect()
    }

    fn normals(seed: u64, n: usize) -> Vec<f64> {
        let u = uniforms(seed, 2 * n);
        (0..n)
            .map(|i| {
                let a = u[2 * i] + 0.5;
                let b = u[2 * i + 1] + 0.5;
                (-2.0 * (1.0 - a).ln()).sqrt() * (2.0 * PI * b).cos()
            })
            .collect()
    }

    // Equivalent level-j filter from explicitly upsampled unit filters.
    fn equivalent_filter(f: &WaveletFilterPair, j: usize, wavelet: bool) -> Vec<f64> {
        let upsample = |taps: &[f64], s: usize| {
            let mut out = vec![0.0; (taps.len() - 1) * s + 1];
            for (i, &t) in taps.iter().enumerate() {
                out[i * s] = t;
            }
            out
        };
        let conv = |a: &[f64], b: &[f64]| {
            let mut out = vec![0.0; a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (k, y) in b.iter().enumerate() {
                    out[i + k] += x * y;
                }
            }
            out
        };
        let mut acc = vec![1.0];
        for level in 1..j {
            acc = conv(&acc, &upsample(&f.scaling, 1 << (level - 1)));
        }
        let last = if wavelet { &f.wavelet } else { &f.scaling };
        conv(&acc, &upsample(last, 1 << (j - 1)))
    }

    fn direct(y: &[f64], filt: &[f64]) -> Vec<f64> {
        let n = y.len() as i64;
        (0..n)
            .map(|t| {
                filt.iter()
                    .enumerate()
                    .map(|(l, h)| h * y[((t - l as i64).rem_euclid(n)) as usize])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn db4_has_eight_taps() {
        assert_eq!(daubechies_filters(4).unwrap().width(), 8);
        assert!(matches!(
            daubechies_filters(0),
            Err(Error::UnsupportedOrder(0))
        ));
        assert!(matches!(
            daubechies_filters(11),
            Err(Error::UnsupportedOrder(11))
        ));
    }

    #[test]
    fn filter_identities_hold_for_all_orders() {
        for order in 1..=10 {
            let f = daubechies_filters(order).unwrap();
            assert_eq!(f.width(), 2 * order);
            let sh: f64 = f.wavelet.iter().sum();
            let sg: f64 = f.scaling.iter().sum();
            let eh: f64 = f.wavelet.iter().map(|h| h * h).sum();
            let eg: f64 = f.scaling.iter().map(|g| g * g).sum();
            let cross: f64 = f.wavelet.iter().zip(&f.scaling).map(|(h, g)| h * g).sum();
            assert!(sh.abs() < 1e-12, "order {order}: Σh = {sh}");
            assert!((sg - 1.0).abs() < 1e-12, "order {order}: Σg = {sg}");
            assert!((eh - 0.5).abs() < 1e-12);
            assert!((eg - 0.5).abs() < 1e-12);
            assert!(cross.abs() < 1e-12);
        }
    }

    #[test]
    fn max_level_hand_values() {
        assert_eq!(max_level(1000, 8).unwrap(), 7);
        assert_eq!(max_level(8, 8).unwrap(), 1);
        assert_eq!(max_level(64, 8).unwrap(), 3);
        assert!(max_level(7, 8).is_err());
    }

    #[test]
    fn decompose_rejects_excess_depth() {
        let s = TimeSeries::new(uniforms(1, 64)).unwrap();
        let f = daubechies_filters(4).unwrap();
        assert!(matches!(
            modwt_decompose(&s, &f, 4),
            Err(Error::LevelTooHigh {
                requested: 4,
                max: 3,
                len: 64
            })
        ));
    }

    #[test]
    fn energy_is_preserved() {
        let y = uniforms(2, 300);
        let s = TimeSeries::new(y.clone()).unwrap();
        let f = daubechies_filters(4).unwrap();
        let d = modwt_decompose(&s, &f, max_level(300, 8).unwrap()).unwrap();
        let e0: f64 = y.iter().map(|v| v * v).sum();
        let e1: f64 = d
            .levels
            .iter()
            .flat_map(|l| l.coefficients.iter())
            .chain(d.scaling.iter())
            .map(|v| v * v)
            .sum();
        assert!(((e0 - e1) / e0).abs() < 1e-8);
    }

    #[test]
    fn constant_series_has_zero_wavelet_coefficients() {
        let s = TimeSeries::new(vec![3.0; 128]).unwrap();
        let f = daubechies_filters(4).unwrap();
        let d = modwt_decompose(&s, &f, 4).unwrap();
        for lvl in &d.levels {
            assert!(lvl.coefficients.iter().all(|w| w.abs() < 1e-12));
        }
    }

    #[test]
    fn pyramid_matches_direct_convolution() {
        for order in [2, 4] {
            let f = daubechies_filters(order).unwrap();
            let y = uniforms(10 + order as u64, 32);
            let s = TimeSeries::new(y.clone()).unwrap();
            let d = modwt_decompose(&s, &f, 2).unwrap();
            for j in 1..=2 {
                let hj = equivalent_filter(&f, j, true);
                assert_eq!(hj.len(), filter_width(j, f.width()));
                let expect = direct(&y, &hj);
                for (a, b) in d.level(j).unwrap().coefficients.iter().zip(&expect) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
            let expect_v = direct(&y, &equivalent_filter(&f, 2, false));
            for (a, b) in d.scaling.iter().zip(&expect_v) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn circular_shift_covariance() {
        let y = uniforms(4, 128);
        let shift = 13;
        let shifted: Vec<f64> = (0..128).map(|t| y[(t + 128 - shift) % 128]).collect();
        let f = daubechies_filters(4).unwrap();
        let a = modwt_decompose(&TimeSeries::new(y).unwrap(), &f, 3).unwrap();
        let b = modwt_decompose(&TimeSeries::new(shifted).unwrap(), &f, 3).unwrap();
        for (la, lb) in a.levels.iter().zip(&b.levels) {
            for t in 0..128 {
                let expect = la.coefficients[(t + 128 - shift) % 128];
                assert!((lb.coefficients[t] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn biweight_of_equal_values_is_zero() {
        assert_eq!(biweight_midvariance(&[2.0; 20], 1), Some(0.0));
    }

    #[test]
    fn biweight_needs_four_nonboundary_points() {
        assert_eq!(biweight_midvariance(&[1.0, 2.0, 3.0, 4.0, 5.0], 3), None);
        assert!(biweight_midvariance(&[1.0, 2.0, 3.0, 4.0, 5.0], 2).is_some());
    }

    #[test]
    fn biweight_consistent_for_normal_data() {
        let x = normals(21, 10_000);
        let v = biweight_midvariance(&x, 1).unwrap();
        assert!((0.9..=1.1).contains(&v), "got {v}");
    }

    #[test]
    fn biweight_resists_gross_outliers() {
        let mut x = normals(22, 10_000);
        for (i, xi) in x.iter_mut().enumerate().filter(|(i, _)| i % 10 == 0) {
            *xi = if (i / 10) % 2 == 0 { 100.0 } else { -100.0 };
        }
        let robust = biweight_midvariance(&x, 1).unwrap();
        let plain = stats::sample_variance(&x);
        assert!((0.5..=2.0).contains(&robust), "robust {robust}");
        assert!(plain > 500.0, "plain {plain}");
    }

    #[test]
    fn biweight_location_and_scale_behaviour() {
        let x = normals(23, 500);
        let base = biweight_midvariance(&x, 1).unwrap();
        let shifted: Vec<f64> = x.iter().map(|v| v + 7.0).collect();
        let scaled: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let s = biweight_midvariance(&shifted, 1).unwrap();
        let k = biweight_midvariance(&scaled, 1).unwrap();
        assert!(((s - base) / base).abs() < 1e-10);
        assert!(((k - 9.0 * base) / (9.0 * base)).abs() < 1e-10);
    }

    fn sine_decomposition(periods: &[f64], n: usize) -> WaveletDecomposition {
        let y: Vec<f64> = (0..n)
            .map(|t| {
                periods
                    .iter()
                    .map(|p| (2.0 * PI * t as f64 / p).sin())
                    .sum()
            })
            .collect();
        let f = daubechies_filters(4).unwrap();
        let mut d =
            modwt_decompose(&TimeSeries::new(y).unwrap(), &f, max_level(n, 8).unwrap()).unwrap();
        d.estimate_variances(VarianceEstimator::Biweight);
        d
    }

    #[test]
    fn three_sines_rank_levels_four_to_six() {
        let d = sine_decomposition(&[20.0, 50.0, 100.0], 1000);
        let ranked = rank_levels(&d, 0.05);
        let mut top: Vec<usize> = ranked.iter().copied().take(3).collect();
        top.sort();
        assert_eq!(top, vec![4, 5, 6], "ranked {ranked:?}");
    }

    #[test]
    fn single_sine_ranks_its_band_first() {
        let d = sine_decomposition(&[100.0], 1000);
        assert_eq!(rank_levels(&d, 0.05).first(), Some(&6));
    }

    #[test]
    fn sine_variance_peaks_in_its_octave() {
        for (period, band) in [(20.0, 4), (50.0, 5), (100.0, 6)] {
            let d = sine_decomposition(&[period], 1000);
            let own = d.level(band).unwrap().variance.unwrap();
            for lvl in d.levels.iter().filter(|l| l.level != band) {
                assert!(
                    own > lvl.variance.unwrap(),
                    "T={period} level {}",
                    lvl.level
                );
            }
        }
    }

    #[test]
    fn tiny_shares_rank_nothing() {
        let mut d = sine_decomposition(&[100.0], 1000);
        for lvl in &mut d.levels {
            lvl.variance = Some(1e-9);
            lvl.share = 1.0 / 7.0;
        }
        assert!(rank_levels(&d, 0.5).is_empty());
        for lvl in &mut d.levels {
            lvl.variance = Some(0.0);
        }
        assert!(rank_levels(&d, 0.0).is_empty());
    }
}
