//! CSV tables and gnuplot scripts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mcftn_core::{GramMatrix, Scheme, SweepResult};
use serde::Serialize;

use crate::CliError;

#[derive(Serialize)]
struct CapacityRow {
    snr_db: f64,
    scheme: Scheme,
    alpha: f64,
    beta: f64,
    mean_bps_hz: f64,
    stderr: f64,
    n: usize,
}

#[derive(Serialize)]
struct BerRow {
    snr_db: f64,
    scheme: Scheme,
    alpha: f64,
    beta: f64,
    ber: f64,
    ci_low: f64,
    ci_high: f64,
    bits: u64,
}

#[derive(Serialize)]
struct GramRow {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct EigRow {
    index: usize,
    eigenvalue: f64,
    active: bool,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_capacity(dir: &Path, results: &[SweepResult]) -> Result<PathBuf, CliError> {
    let path = dir.join("capacity.csv");
    let rows = results.iter().flat_map(|r| {
        let base = &r.metadata.spec.base;
        r.points.iter().map(move |p| CapacityRow {
            snr_db: p.snr_db,
            scheme: p.scheme,
            alpha: base.alpha,
            beta: base.beta,
            mean_bps_hz: p.mean,
            stderr: p.stderr,
            n: p.count,
        })
    });
    write_rows(&path, rows)?;
    let script = plot_script(results, "capacity", "Normalized capacity (bps/Hz)", false, |p| {
        format!("{} {}", p.mean, p.stderr)
    });
    write_text(&dir.join("capacity.gp"), &script)?;
    Ok(path)
}

pub fn write_ber(dir: &Path, results: &[SweepResult]) -> Result<PathBuf, CliError> {
    let path = dir.join("ber.csv");
    let mut rows = Vec::new();
    for r in results {
        let base = &r.metadata.spec.base;
        for p in &r.points {
            let est = p.ber.ok_or_else(|| CliError::Numerical(format!("missing bit counts for {}", p.scheme)))?;
            let (ci_low, ci_high) = est.interval();
            rows.push(BerRow {
                snr_db: p.snr_db,
                scheme: p.scheme,
                alpha: base.alpha,
                beta: base.beta,
                ber: est.ber(),
                ci_low,
                ci_high,
                bits: est.bits,
            });
        }
    }
    write_rows(&path, rows)?;
    let script = plot_script(results, "ber", "Uncoded BER", true, |p| {
        let est = p.ber.unwrap_or_default();
        let (lo, hi) = est.interval();
        format!("{} {lo} {hi}", est.ber())
    });
    write_text(&dir.join("ber.gp"), &script)?;
    Ok(path)
}

pub fn write_gram(dir: &Path, gram: &GramMatrix) -> Result<(PathBuf, PathBuf), CliError> {
    let path = dir.join("gram.csv");
    let g = gram.matrix();
    let rows = (0..g.nrows()).flat_map(|row| {
        (0..g.ncols()).map(move |col| GramRow {
            row,
            col,
            re: g[(row, col)].re,
            im: g[(row, col)].im,
        })
    });
    write_rows(&path, rows)?;
    let eig_path = dir.join("gram_eigs.csv");
    let floor = gram.floor();
    let eigs = gram.eigenvalues().iter().enumerate().map(|(index, &eigenvalue)| EigRow {
        index,
        eigenvalue,
        active: eigenvalue > floor,
    });
    write_rows(&eig_path, eigs)?;
    Ok((path, eig_path))
}

/// A self-contained gnuplot script with one inline data block per curve.
fn plot_script(
    results: &[SweepResult],
    stem: &str,
    ylabel: &str,
    log_y: bool,
    columns: impl Fn(&mcftn_core::montecarlo::SweepPoint) -> String,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set terminal pngcairo size 900,600");
    let _ = writeln!(s, "set output '{stem}.png'");
    let _ = writeln!(s, "set xlabel 'SNR (dB)'");
    let _ = writeln!(s, "set ylabel '{ylabel}'");
    let _ = writeln!(s, "set grid");
    let _ = writeln!(s, "set key top left");
    if log_y {
        let _ = writeln!(s, "set logscale y");
        let _ = writeln!(s, "set key bottom left");
    }
    let mut plots = Vec::new();
    for (i, r) in results.iter().enumerate() {
        let base = &r.metadata.spec.base;
        for (j, &scheme) in r.metadata.spec.schemes.iter().enumerate() {
            let block = format!("$d{i}_{j}");
            let _ = writeln!(s, "{block} << EOD");
            for p in r.points.iter().filter(|p| p.scheme == scheme) {
                let _ = writeln!(s, "{} {}", p.snr_db, columns(p));
            }
            let _ = writeln!(s, "EOD");
            let title = format!("{scheme} alpha={} beta={}", base.alpha, base.beta);
            let style = if log_y { "using 1:2:3:4 with yerrorlines" } else { "using 1:2:3 with yerrorlines" };
            plots.push(format!("{block} {style} title '{title}'"));
        }
    }
    let _ = writeln!(s, "plot {}", plots.join(", \\\n     "));
    s
}
