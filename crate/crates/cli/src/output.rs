//! JSON report shaping, diagnostics dumps and atomic file writes.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use robustperiod::detector::{Detection, LevelAnalysis};
use robustperiod::{DetectorConfig, PeriodReport};

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

#[derive(Debug, Serialize)]
pub struct PeriodJson {
    pub length: f64,
    pub level: usize,
    pub p_value: f64,
    pub variance_share: f64,
    pub acf_median_distance: f64,
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub periods: Vec<PeriodJson>,
    pub levels_examined: usize,
    pub degenerate: bool,
    pub config: DetectorConfig,
}

impl From<&PeriodReport> for ReportJson {
    fn from(r: &PeriodReport) -> Self {
        Self {
            periods: r
                .periods
                .iter()
                .map(|p| PeriodJson {
                    length: round3(p.length),
                    level: p.level,
                    p_value: p.p_value,
                    variance_share: p.variance_share,
                    acf_median_distance: round3(p.acf_median_distance),
                })
                .collect(),
            levels_examined: r.levels_examined,
            degenerate: r.degenerate,
            config: r.config,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> io::Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    s.push('\n');
    Ok(s)
}

/// Writes `bytes` to `path` through a temporary sibling and a rename, or to
/// standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Per examined level: `level_J_periodogram.csv` (k, power, robust) and, when
/// the ACF was computed, `level_J_acf.csv` (lag, acf, peak).
pub fn dump_diagnostics(dir: &Path, detection: &Detection) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for level in &detection.levels {
        dump_level(dir, level)?;
    }
    Ok(())
}

fn dump_level(dir: &Path, a: &LevelAnalysis) -> io::Result<()> {
    let mut csv = String::from("k,power,robust\n");
    for (k, (p, r)) in a
        .periodogram
        .power
        .iter()
        .zip(&a.periodogram.robust_mask)
        .enumerate()
    {
        csv.push_str(&format!("{k},{p},{}\n", u8::from(*r)));
    }
    write_atomic(
        &dir.join(format!("level_{}_periodogram.csv", a.level)),
        csv.as_bytes(),
    )?;

    if let Some(acf) = &a.acf {
        let mut csv = String::from("lag,acf,peak\n");
        for (t, v) in acf.values.iter().enumerate() {
            let peak = u8::from(a.peaks.binary_search(&t).is_ok());
            csv.push_str(&format!("{t},{v},{peak}\n"));
        }
        write_atomic(
            &dir.join(format!("level_{}_acf.csv", a.level)),
            csv.as_bytes(),
        )?;
    }
    Ok(())
}
