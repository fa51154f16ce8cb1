//! Seeded synthetic series (periodic waves + triangle trend + Gaussian noise
//! + spikes/dips) and tolerance-based precision/recall scoring.
//!
//! The random stream is Xoshiro256++ seeded through SplitMix64
//! (`seed_from_u64`). Uniforms take the top 53 bits of each 64-bit output;
//! normals come from Box–Muller pairs. Draw order: `length` normals (noise),
//! then one uniform per outlier for a partial Fisher–Yates selection of
//! positions, then one uniform per outlier for its sign (`< 0.5` is a spike).

use std::time::Instant;

use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{robust_period, DetectorConfig};
use crate::error::{invalid, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Waveform {
    Sin,
    Square,
    Triangle,
}

impl Waveform {
    /// Unit-amplitude, zero-mean wave of period `period` at time `t`, starting
    /// at phase zero.
    pub fn sample(self, t: usize, period: usize) -> f64 {
        match self {
            Waveform::Sin => (2.0 * std::f64::consts::PI * t as f64 / period as f64).sin(),
            Waveform::Square => {
                if 2 * (t % period) < period {
                    1.0
                } else {
                    -1.0
                }
            }
            Waveform::Triangle => {
                let phase = (t % period) as f64 / period as f64;
                if phase < 0.25 {
                    4.0 * phase
                } else if phase < 0.75 {
                    2.0 - 4.0 * phase
                } else {
                    4.0 * phase - 4.0
                }
            }
        }
    }
}

impl std::str::FromStr for Waveform {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sin" => Ok(Waveform::Sin),
            "square" => Ok(Waveform::Square),
            "triangle" => Ok(Waveform::Triangle),
            other => Err(format!("unknown waveform `{other}` (sin|square|triangle)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub waveform: Waveform,
    pub periods: Vec<usize>,
    pub amplitudes: Vec<f64>,
    pub length: usize,
    /// Peak of a single rise-and-fall triangle spanning the series.
    pub trend_amplitude: f64,
    pub noise_variance: f64,
    pub outlier_ratio: f64,
    pub outlier_amplitude: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            waveform: Waveform::Sin,
            periods: vec![20, 50, 100],
            amplitudes: vec![1.0; 3],
            length: 1000,
            trend_amplitude: 10.0,
            noise_variance: 0.1,
            outlier_ratio: 0.01,
            outlier_amplitude: 5.0,
            seed: 0,
        }
    }
}

/// Named benchmark scenarios.
pub const SCENARIOS: &[&str] = &[
    "sin-mild",
    "sin-severe",
    "square-mild",
    "square-severe",
    "triangle-mild",
    "triangle-severe",
    "single-mild",
    "single-severe",
    "sin-ablation",
    "noise",
];

impl SyntheticSpec {
    /// Mild: noise variance 0.1, 1% outliers. Severe: variance 1, 10%
    /// outliers (single-period severe and `sin-ablation`: variance 2, 20%).
    /// `noise` is pure Gaussian white noise with no periods, trend or outliers.
    pub fn scenario(name: &str) -> Option<Self> {
        let mild = |waveform| Self {
            waveform,
            ..Self::default()
        };
        let severe = |waveform| Self {
            waveform,
            noise_variance: 1.0,
            outlier_ratio: 0.1,
            ..Self::default()
        };
        Some(match name {
            "sin-mild" => mild(Waveform::Sin),
            "sin-severe" => severe(Waveform::Sin),
            "square-mild" => mild(Waveform::Square),
            "square-severe" => severe(Waveform::Square),
            "triangle-mild" => mild(Waveform::Triangle),
            "triangle-severe" => severe(Waveform::Triangle),
            "single-mild" => Self {
                periods: vec![100],
                amplitudes: vec![1.0],
                ..Self::default()
            },
            "single-severe" => Self {
                periods: vec![100],
                amplitudes: vec![1.0],
                noise_variance: 2.0,
                outlier_ratio: 0.2,
                ..Self::default()
            },
            "sin-ablation" => Self {
                noise_variance: 2.0,
                outlier_ratio: 0.2,
                ..Self::default()
            },
            "noise" => Self {
                periods: Vec::new(),
                amplitudes: Vec::new(),
                trend_amplitude: 0.0,
                noise_variance: 1.0,
                outlier_ratio: 0.0,
                ..Self::default()
            },
            _ => return None,
        })
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(invalid("length", "must be positive"));
        }
        if self.amplitudes.len() != self.periods.len() {
            return Err(invalid(
                "amplitudes",
                format!(
                    "{} amplitudes for {} periods",
                    self.amplitudes.len(),
                    self.periods.len()
                ),
            ));
        }
        if let Some(&p) = self
            .periods
            .iter()
            .find(|&&p| p == 0 || p * 4 > self.length)
        {
            return Err(invalid(
                "periods",
                format!(
                    "period {p} must lie in 1..={} (length / 4)",
                    self.length / 4
                ),
            ));
        }
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return Err(invalid("noise_variance", "must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&self.outlier_ratio) {
            return Err(invalid("outlier_ratio", "must lie in [0, 1)"));
        }
        if !self.trend_amplitude.is_finite() || !self.outlier_amplitude.is_finite() {
            return Err(invalid("amplitude", "must be finite"));
        }
        Ok(())
    }

    pub fn outlier_count(&self) -> usize {
        (self.outlier_ratio * self.length as f64).floor() as usize
    }

    pub fn truth(&self) -> Vec<f64> {
        self.periods.iter().map(|&p| p as f64).collect()
    }
}

struct Stream(Xoshiro256PlusPlus);

impl Stream {
    fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let a = 2.0 * std::f64::consts::PI * u2;
        (r * a.cos(), r * a.sin())
    }
}

/// A generated series together with where its outliers were placed.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub series: TimeSeries,
    pub outlier_positions: Vec<usize>,
}

pub fn generate(spec: &SyntheticSpec) -> Result<TimeSeries> {
    Ok(generate_detailed(spec)?.series)
}

pub fn generate_detailed(spec: &SyntheticSpec) -> Result<Synthetic> {
    spec.validate()?;
    let n = spec.length;
    let mut rng = Stream::new(spec.seed);

    let half = n as f64 / 2.0;
    let mut values: Vec<f64> = (0..n)
        .map(|t| {
            let periodic: f64 = spec
                .periods
                .iter()
                .zip(&spec.amplitudes)
                .map(|(&p, &a)| a * spec.waveform.sample(t, p))
                .sum();
            let trend = spec.trend_amplitude * (1.0 - (t as f64 - half).abs() / half);
            periodic + trend
        })
        .collect();

    let sd = spec.noise_variance.sqrt();
    let mut t = 0;
    while t < n {
        let (a, b) = rng.normal_pair();
        values[t] += sd * a;
        if t + 1 < n {
            values[t + 1] += sd * b;
        }
        t += 2;
    }

    let m = spec.outlier_count();
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = i + ((rng.uniform() * (n - i) as f64) as usize).min(n - i - 1);
        idx.swap(i, j);
    }
    let positions = idx[..m].to_vec();
    for &p in &positions {
        let sign = if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
        values[p] += sign * spec.outlier_amplitude;
    }

    Ok(Synthetic {
        series: TimeSeries::new(values)?.with_label(format!("synthetic seed {}", spec.seed)),
        outlier_positions: positions,
    })
}

/// Precision/recall of detected periods against ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `(detected, truth)` pairs.
    pub matched: Vec<(f64, f64)>,
    pub tolerance: f64,
    pub detected: usize,
    pub truth: usize,
}

impl Metrics {
    fn from_counts(matches: usize, detected: usize, truth: usize, tolerance: f64) -> Self {
        let (precision, recall) = match (detected, truth) {
            (0, 0) => (1.0, 1.0),
            _ => (
                if detected == 0 {
                    0.0
                } else {
                    matches as f64 / detected as f64
                },
                if truth == 0 {
                    0.0
                } else {
                    matches as f64 / truth as f64
                },
            ),
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            precision,
            recall,
            f1,
            matched: Vec::new(),
            tolerance,
            detected,
            truth,
        }
    }
}

/// Greedy one-to-one matching: detected values in ascending order each take
/// the nearest unmatched truth within `tolerance` relative to the truth.
pub fn score(detected: &[f64], truth: &[f64], tolerance: f64) -> Metrics {
    let mut order = detected.to_vec();
    order.sort_by(f64::total_cmp);
    let mut used = vec![false; truth.len()];
    let mut matched = Vec::new();
    for d in order {
        let best = truth
            .iter()
            .enumerate()
            .filter(|&(i, &t)| !used[i] && within(d, t, tolerance))
            .min_by(|a, b| (d - a.1).abs().total_cmp(&(d - b.1).abs()));
        if let Some((i, &t)) = best {
            used[i] = true;
            matched.push((d, t));
        }
    }
    let mut m = Metrics::from_counts(matched.len(), detected.len(), truth.len(), tolerance);
    m.matched = matched;
    m
}

fn within(detected: f64, truth: f64, tolerance: f64) -> bool {
    (detected - truth).abs() <= tolerance * truth.abs() * (1.0 + 1e-12) + 1e-12
}

/// Detections for one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub seed: u64,
    pub detected: Vec<f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOutcome {
    pub truth: Vec<f64>,
    pub runs: Vec<RunOutcome>,
    pub metrics: Metrics,
    pub mean_seconds_per_series: f64,
}

impl BenchmarkOutcome {
    /// Micro-averaged metrics over all runs at another tolerance.
    pub fn rescore(&self, tolerance: f64) -> Metrics {
        let (mut matches, mut detected, mut truth) = (0, 0, 0);
        for r in &self.runs {
            let m = score(&r.detected, &self.truth, tolerance);
            matches += m.matched.len();
            detected += m.detected;
            truth += m.truth;
        }
        Metrics::from_counts(matches, detected, truth, tolerance)
    }

    /// Fraction of runs that reported at least one period.
    pub fn detection_rate(&self) -> f64 {
        let hits = self.runs.iter().filter(|r| !r.detected.is_empty()).count();
        hits as f64 / self.runs.len().max(1) as f64
    }

    pub fn summary(&self, scenario: impl Into<String>) -> BenchmarkSummary {
        BenchmarkSummary {
            scenario: scenario.into(),
            runs: self.runs.len(),
            tolerance: self.metrics.tolerance,
            precision: self.metrics.precision,
            recall: self.metrics.recall,
            f1: self.metrics.f1,
            mean_seconds_per_series: self.mean_seconds_per_series,
        }
    }
}

/// Machine-readable benchmark result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub scenario: String,
    pub runs: usize,
    pub tolerance: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mean_seconds_per_series: f64,
}

/// Generates `runs` series with seeds `spec.seed, spec.seed + 1, ...`, detects
/// periods in each and micro-averages the scores. Runs execute in parallel;
/// results are reported in seed order.
pub fn run_benchmark(
    spec: &SyntheticSpec,
    runs: usize,
    cfg: &DetectorConfig,
    tolerance: f64,
) -> Result<BenchmarkOutcome> {
    if runs == 0 {
        return Err(invalid("runs", "must be >= 1"));
    }
    if !(tolerance >= 0.0) {
        return Err(invalid("tolerance", "must be >= 0"));
    }
    spec.validate()?;
    cfg.validate()?;
    let outcomes: Vec<RunOutcome> = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = spec.seed.wrapping_add(i);
            let series = generate(&spec.with_seed(seed))?;
            let start = Instant::now();
            let detected = robust_period(&series, cfg)?.lengths();
            let seconds = start.elapsed().as_secs_f64();
            Ok(RunOutcome {
                seed,
                detected,
                seconds,
            })
        })
        .collect::<Result<_>>()?;
    let mean_seconds_per_series =
        outcomes.iter().map(|r| r.seconds).sum::<f64>() / outcomes.len() as f64;
    let mut out = BenchmarkOutcome {
        truth: spec.truth(),
        runs: outcomes,
        metrics: Metrics::from_counts(0, 0, 0, tolerance),
        mean_seconds_per_series,
    };
    out.metrics = out.rescore(tolerance);
    Ok(out)
}
