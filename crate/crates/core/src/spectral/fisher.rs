//! Fisher's g-test for a dominant periodogram ordinate.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// The g-statistic and the bin attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherG {
    pub g: f64,
    pub k_star: usize,
}

/// `max P_k / Σ P_k` over `range`; ties resolve to the smallest index.
///
/// `None` when the range holds fewer than two bins or no power.
pub fn fisher_g(power: &[f64], range: Range<usize>) -> Option<FisherG> {
    let range = range.start..range.end.min(power.len());
    if range.len() < 2 {
        return None;
    }
    let bins = &power[range.clone()];
    let total: f64 = bins.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let (offset, max) =
        bins.iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
    Some(FisherG {
        g: max / total,
        k_star: range.start + offset,
    })
}

/// Tail probability `P(g >= g0)` for `m` independent exponential ordinates:
/// `Σ_{k=1}^{⌊1/g0⌋} (-1)^{k-1} C(m,k) (1 - k g0)^{m-1}`, clamped to `[0, 1]`.
///
/// For small `g0` the terms grow far beyond 1 and cancel; once the rounding
/// error of the sum could exceed 1e-9 the first-term Poisson form
/// `1 - exp(-m (1 - g0)^{m-1})` is returned instead. There the tail is close
/// to 1 and the two differ by less than 1e-6.
pub fn fisher_pvalue(g0: f64, m: usize) -> Result<f64> {
    if !(g0 > 0.0 && g0 <= 1.0) {
        return Err(invalid("g0", format!("must lie in (0, 1], got {g0}")));
    }
    if m < 2 {
        return Err(invalid("m", format!("need at least 2 bins, got {m}")));
    }
    let mf = m as f64;
    let kmax = ((1.0 / g0).floor() as usize).min(m);
    let mut sum = 0.0;
    let mut largest: f64 = 0.0;
    let mut terms = 0usize;
    let mut log_binom = 0.0;
    for k in 1..=kmax {
        log_binom += ((mf - k as f64 + 1.0) / k as f64).ln();
        let base = 1.0 - k as f64 * g0;
        if base <= 0.0 {
            break;
        }
        let term = (log_binom + (mf - 1.0) * base.ln()).exp();
        sum += if k % 2 == 1 { term } else { -term };
        largest = largest.max(term);
        terms = k;
        if term < 1e-16 * sum.abs() {
            break;
        }
    }
    let rounding = 4.0 * f64::EPSILON * largest * terms as f64;
    if rounding > 1e-9 {
        let first = mf * ((mf - 1.0) * (1.0 - g0).ln()).exp();
        return Ok(-(-first).exp_m1());
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// Outcome of Fisher's test on one periodogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherOutcome {
    pub g: f64,
    pub k_star: usize,
    pub p_value: f64,
    pub significant: bool,
    pub alpha: f64,
    /// Number of bins tested.
    pub bins: usize,
}

/// Runs the test over `range`. An all-zero spectrum yields `g = 0`, `p = 1`.
pub fn fisher_test(power: &[f64], range: Range<usize>, alpha: f64) -> FisherOutcome {
    let bins = range.len();
    match fisher_g(power, range) {
        Some(FisherG { g, k_star }) => {
            let p_value = fisher_pvalue(g, bins).unwrap_or(1.0);
            FisherOutcome {
                g,
                k_star,
                p_value,
                significant: p_value < alpha,
                alpha,
                bins,
            }
        }
        None => FisherOutcome {
            g: 0.0,
            k_star: 0,
            p_value: 1.0,
            significant: false,
            alpha,
            bins,
        },
    }
}
