//! CSV tables and the file layout of a sweep's output directory.

use std::path::{Path, PathBuf};

use thiserror::Error;

use scsec_core::{FadingState, SchemeKind};

use crate::config::ExperimentConfig;
use crate::plot::{emit_plot, PlotError};
use crate::sweep::{Cell, SweepResult, SweepRow};

pub const SWEEP_HEADER: [&str; 8] =
    ["scheme", "p_bar_w", "k", "ergodic_secrecy_rate_bps_hz", "avg_power_w", "duality_gap", "wall_ms", "seed"];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("malformed row {line} in {path}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error(transparent)]
    Plot(#[from] PlotError),
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv { path: path.to_path_buf(), source }
}

/// Fixed decimal notation rounded to six significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".to_string() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = 5 - magnitude;
    if decimals >= 0 {
        let s = format!("{:.*}", decimals as usize, x);
        // Rounding can carry into a new leading digit (9.999995 -> 10.00000).
        let digits = s.trim_start_matches('-').replace('.', "");
        if digits.trim_start_matches('0').len() > 6 && decimals > 0 {
            format!("{:.*}", decimals as usize - 1, x)
        } else {
            s
        }
    } else {
        let scale = 10f64.powi(-decimals);
        format!("{:.0}", (x / scale).round() * scale)
    }
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(SWEEP_HEADER).map_err(csv_err(path))?;
    for r in rows {
        w.write_record([
            r.scheme.tag().to_string(),
            format_sig6(r.p_bar),
            r.k.to_string(),
            format_sig6(r.ergodic_rate),
            format_sig6(r.avg_power),
            r.duality_gap.map(format_sig6).unwrap_or_default(),
            format_sig6(r.wall_ms),
            r.seed.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| OutputError::Io { path: path.to_path_buf(), source })
}

/// Parses a file written by [`write_sweep_csv`].
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>, OutputError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(OutputError::Malformed { path: path.to_path_buf(), line: 1, message: "unexpected header".into() });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let bad = |message: String| OutputError::Malformed { path: path.to_path_buf(), line: i + 2, message };
        let num = |j: usize| rec[j].parse::<f64>().map_err(|e| bad(format!("column {}: {e}", SWEEP_HEADER[j])));
        rows.push(SweepRow {
            scheme: rec[0].parse::<SchemeKind>().map_err(|e| bad(e.to_string()))?,
            p_bar: num(1)?,
            k: rec[2].parse().map_err(|e| bad(format!("column k: {e}")))?,
            ergodic_rate: num(3)?,
            avg_power: num(4)?,
            duality_gap: if rec[5].is_empty() { None } else { Some(num(5)?) },
            wall_ms: num(6)?,
            seed: rec[7].parse().map_err(|e| bad(format!("column seed: {e}")))?,
        });
    }
    Ok(rows)
}

/// `allocations_<scheme>_<pbar>.csv`, with a `_k<K>` suffix away from the base K.
pub fn allocation_file_name(row: &SweepRow, base_k: u32) -> String {
    let suffix = if row.k == base_k { String::new() } else { format!("_k{}", row.k) };
    format!("allocations_{}_{}{}.csv", row.scheme.tag(), row.p_bar, suffix)
}

/// Per-state dump of one cell. Values keep full precision so the reported
/// ergodic rate can be recomputed exactly from the file.
pub fn write_allocations(cell: &Cell, states: &[FadingState], path: &Path) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["state", "g_l", "g_e", "weight", "p_w", "beta", "mu"]).map_err(csv_err(path))?;
    for wa in &cell.allocations {
        let s = &states[wa.state];
        let a = &wa.allocation;
        w.write_record([
            wa.state.to_string(),
            s.g_l.to_string(),
            s.g_e.to_string(),
            wa.weight.to_string(),
            a.p.to_string(),
            a.beta.to_string(),
            a.mu.as_u8().to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|source| OutputError::Io { path: path.to_path_buf(), source })
}

/// Writes `sweep.csv`, the two figures, and every allocation dump into `dir`.
/// Returns the paths written.
pub fn write_outputs(result: &SweepResult, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Io { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    let rows = result.rows();

    let sweep = dir.join("sweep.csv");
    write_sweep_csv(&rows, &sweep)?;
    written.push(sweep);

    let base: Vec<SweepRow> = rows.iter().filter(|r| r.k == result.base_k).cloned().collect();
    if !base.is_empty() {
        let path = dir.join("fig2.svg");
        emit_plot(&base, &path, &format!("Ergodic secrecy rate per scheme (K = {})", result.base_k))?;
        written.push(path);
    }
    let semantic: Vec<SweepRow> = rows.iter().filter(|r| r.scheme.is_semantic()).cloned().collect();
    if !semantic.is_empty() {
        let path = dir.join("fig3.svg");
        emit_plot(&semantic, &path, "Ergodic secrecy rate per semantic encoder K")?;
        written.push(path);
    }

    for cell in &result.cells {
        let path = dir.join(allocation_file_name(&cell.row, cfg.base_k()));
        write_allocations(cell, &result.states, &path)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(13.171206), "13.1712");
        assert_eq!(format_sig6(0.1), "0.100000");
        assert_eq!(format_sig6(10.0), "10.0000");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
        assert_eq!(format_sig6(-2.5), "-2.50000");
        assert_eq!(format_sig6(1234567.0), "1234570");
        assert_eq!(format_sig6(9.9999996), "10.0000");
        assert_eq!(format_sig6(0.0), "0");
    }

    #[test]
    fn empty_result_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_sweep_csv(&[], &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), SWEEP_HEADER.join(",") + "\n");
        assert!(read_sweep_csv(&path).unwrap().is_empty());
    }

    #[test]
    fn round_trip_keeps_six_digits() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let mut rows = Vec::new();
        for (i, scheme) in SchemeKind::ALL.into_iter().enumerate() {
            for p_bar in [0.1, 0.5, 1.0, 5.0, 10.0] {
                rows.push(SweepRow {
                    scheme,
                    p_bar,
                    k: 5,
                    ergodic_rate: 1.23456789 * (i + 1) as f64 / p_bar,
                    avg_power: p_bar * 0.99999123,
                    duality_gap: (scheme != SchemeKind::ScSca).then_some(3.21e-7),
                    wall_ms: 0.0,
                    seed: 7,
                });
            }
        }
        write_sweep_csv(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 21);
        let back = read_sweep_csv(&path).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 5e-6 * b.abs();
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!((a.scheme, a.k, a.seed), (b.scheme, b.k, b.seed));
            assert!(close(b.p_bar, a.p_bar) && close(b.ergodic_rate, a.ergodic_rate));
            assert!(close(b.avg_power, a.avg_power));
            assert_eq!(a.duality_gap.is_some(), b.duality_gap.is_some());
            if let (Some(x), Some(y)) = (a.duality_gap, b.duality_gap) {
                assert!(close(y, x));
            }
        }
    }

    #[test]
    fn allocation_names() {
        let row = SweepRow {
            scheme: SchemeKind::ScSca,
            p_bar: 0.5,
            k: 5,
            ergodic_rate: 0.0,
            avg_power: 0.0,
            duality_gap: None,
            wall_ms: 0.0,
            seed: 1,
        };
        assert_eq!(allocation_file_name(&row, 5), "allocations_sc_sca_0.5.csv");
        assert_eq!(allocation_file_name(&SweepRow { k: 3, ..row }, 5), "allocations_sc_sca_0.5_k3.csv");
    }
}
