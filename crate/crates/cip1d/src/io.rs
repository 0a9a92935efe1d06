//! CSV files for profiles and series, JSON for reports.

use crate::error::{Error, Result};
use crate::types::{MediumProfile, SpatialGrid, SpectralSeries, TimeSeries, Bounds};
use serde::Serialize;
use std::path::Path;

/// A sampled series that can be written as a two-column CSV.
pub trait Series {
    fn header(&self) -> [&'static str; 2];
    fn rows(&self) -> Vec<(f64, f64)>;
}

impl Series for TimeSeries {
    fn header(&self) -> [&'static str; 2] {
        ["t", "value"]
    }
    fn rows(&self) -> Vec<(f64, f64)> {
        self.samples.iter().enumerate().map(|(i, &v)| (self.t(i), v)).collect()
    }
}

impl Series for SpectralSeries {
    fn header(&self) -> [&'static str; 2] {
        ["s", "value"]
    }
    fn rows(&self) -> Vec<(f64, f64)> {
        self.values.iter().enumerate().map(|(i, &v)| (self.s(i), v)).collect()
    }
}

impl Series for MediumProfile {
    fn header(&self) -> [&'static str; 2] {
        ["x", "eps_r"]
    }
    fn rows(&self) -> Vec<(f64, f64)> {
        self.grid.nodes().into_iter().zip(self.values.iter().copied()).collect()
    }
}

pub fn write_columns(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    let n = columns.first().map_or(0, |c| c.len());
    for i in 0..n {
        w.write_record(columns.iter().map(|c| c[i].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_series(series: &impl Series, path: &Path) -> Result<()> {
    let rows = series.rows();
    if rows.len() < 2 {
        return Err(Error::ShortSeries(rows.len()));
    }
    let (a, b): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    write_columns(path, &series.header(), &[&a, &b])
}

pub fn save_profile(profile: &MediumProfile, path: &Path) -> Result<()> {
    save_series(profile, path)
}

fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            let field = rec.get(k).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                reason: format!("row {}: missing column {}", line + 2, k + 1),
            })?;
            field.parse::<f64>().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                reason: format!("row {}: '{field}': {e}", line + 2),
            })
        };
        out.push((parse(0)?, parse(1)?));
    }
    Ok(out)
}

fn uniform_axis(path: &Path, xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 2 {
        return Err(Error::ShortSeries(xs.len()));
    }
    let n = xs.len();
    let step = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::Parse { path: path.to_path_buf(), reason: "abscissa not increasing".into() });
    }
    for (i, &x) in xs.iter().enumerate() {
        let expect = xs[0] + i as f64 * step;
        if (x - expect).abs() > 1e-6 * step {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                reason: format!("non-uniform abscissa at row {}", i + 2),
            });
        }
    }
    Ok((xs[0], step))
}

/// Reads a `(x, eps_r)` CSV and validates it against `bounds`.
pub fn load_profile_with(path: &Path, bounds: Bounds) -> Result<MediumProfile> {
    let rows = read_pairs(path)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    uniform_axis(path, &xs)?;
    let grid = SpatialGrid::new(xs[0], xs[xs.len() - 1], xs.len())?;
    MediumProfile::with_bounds(grid, rows.into_iter().map(|r| r.1).collect(), bounds)
}

pub fn load_profile(path: &Path) -> Result<MediumProfile> {
    load_profile_with(path, Bounds::default())
}

pub fn load_time_series(path: &Path) -> Result<TimeSeries> {
    let rows = read_pairs(path)?;
    let ts: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (t0, dt) = uniform_axis(path, &ts)?;
    TimeSeries::new(t0, dt, rows.into_iter().map(|r| r.1).collect())
}

pub fn load_spectral(path: &Path) -> Result<SpectralSeries> {
    let rows = read_pairs(path)?;
    let ss: Vec<f64> = rows.iter().map(|r| r.0).collect();
    uniform_axis(path, &ss)?;
    let n = ss.len() - 1;
    SpectralSeries::new(ss[0], ss[n], n, rows.into_iter().map(|r| r.1).collect())
}

pub fn write_json(value: &impl Serialize, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
