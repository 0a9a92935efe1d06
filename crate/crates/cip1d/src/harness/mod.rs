//! Experiment driver: simulated data, GLK calibration, calibration-factor
//! sweeps, method comparison and report output.

pub mod plot;

use crate::agcm::{run_agcm, AgcmData, AgcmResult};
use crate::config::Config;
use crate::error::{arg, Error, Result};
use crate::forward::{solve_boundary, solve_cauchy, BoundarySimulation, CauchySimulation};
use crate::glk::{run_glk, GlkResult};
use crate::io::{save_profile, save_series, write_columns, write_json};
use crate::preprocess::{add_noise, calibrate, glk_normalize, select_peak, TargetPlacement};
use crate::traveltime::TravelTimeMap;
use crate::types::{MediumProfile, TimeSeries};
use plot::{emit_plot, PlotSeries};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Agcm,
    Glk,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "agcm" => Ok(Self::Agcm),
            "glk" => Ok(Self::Glk),
            _ => arg(format!("unknown method '{s}'")),
        }
    }
}

/// Point-source trace `g(t) = u(0,t)` on `[0, T]` for AGCM.
pub fn simulate_agcm_trace(profile: &MediumProfile, cfg: &Config) -> Result<TimeSeries> {
    let sim = CauchySimulation::new(profile, cfg.x0, cfg.laplace_t, cfg.forward.dx, cfg.forward.pad)?;
    Ok(solve_cauchy(&sim)?.trace)
}

/// Time needed for GLK to reach `x_target` in `profile`, with a small margin.
pub fn glk_duration(profile: &MediumProfile, cfg: &Config) -> Result<f64> {
    let map = TravelTimeMap::from_profile(profile)?;
    Ok(2.0 * map.z_at(cfg.glk.x_target) + 8.0 * cfg.glk.hz)
}

/// Boundary-source trace `f(t) = u(0,t)` long enough for GLK to reach `x_target`.
pub fn simulate_glk_trace(profile: &MediumProfile, cfg: &Config) -> Result<TimeSeries> {
    let sim = BoundarySimulation::new(profile, glk_duration(profile, cfg)?, cfg.forward.dz)?;
    solve_boundary(&sim)
}

/// Point-source trace with the direct wave `H(t−|x₀|)/2` removed.
pub fn agcm_scattered(profile: &MediumProfile, cfg: &Config) -> Result<TimeSeries> {
    let g = simulate_agcm_trace(profile, cfg)?;
    let front = cfg.x0.abs();
    Ok(g.map(|t, v| {
        if (t - front).abs() <= 1e-9 * g.dt {
            v - 0.25
        } else if t > front {
            v - 0.5
        } else {
            v
        }
    }))
}

/// Boundary-source trace with the direct term removed, `F = f + 1`.
pub fn glk_scattered(profile: &MediumProfile, cfg: &Config) -> Result<TimeSeries> {
    Ok(simulate_glk_trace(profile, cfg)?.map(|_, v| v + 1.0))
}

/// SHA-256 of the sample bits, hex encoded.
pub fn series_hash(series: &TimeSeries) -> String {
    let mut h = Sha256::new();
    h.update(series.t0.to_le_bytes());
    h.update(series.dt.to_le_bytes());
    for v in &series.samples {
        h.update(v.to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReferenceInterval {
    pub material: String,
    pub lo: f64,
    pub hi: f64,
}

impl ReferenceInterval {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

/// Shipped admissible ranges of ε for common target materials.
pub fn reference_intervals() -> Vec<ReferenceInterval> {
    let text = include_str!("../../data/reference_intervals.csv");
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().filter_map(|x| x.ok()).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Calibration {
    pub cf: f64,
    pub rbar: f64,
    pub iterations: usize,
}

/// R̄ of GLK applied to `−1 + cf·F`.
pub fn glk_rbar(scattered: &TimeSeries, cf: f64, cfg: &Config) -> Result<f64> {
    Ok(run_glk(&glk_normalize(scattered, cf)?, cfg)?.rbar)
}

/// Bisection on `log₁₀ CF` for `R̄_GLK(CF·F) = target`.
pub fn calibrate_glk(
    scattered: &TimeSeries,
    target: f64,
    bracket: (f64, f64),
    cfg: &Config,
) -> Result<Calibration> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return arg("bracket must satisfy 0 < lo < hi");
    }
    let tol = 1e-3 * target.abs();
    // Past the blow-up the layer systems lose their positive solution; that side counts as R̄ = ∞.
    let eval = |cf: f64| match glk_rbar(scattered, cf, cfg) {
        Err(Error::Nonpositive(_)) | Err(Error::Singular(_)) => Ok(f64::INFINITY),
        r => r,
    };
    let (mut a, mut b) = (lo.log10(), hi.log10());
    let mut iterations = 0;
    let mid = 10f64.powf(0.5 * (a + b));
    let rm = eval(mid)?;
    iterations += 1;
    if (rm - target).abs() < tol {
        return Ok(Calibration { cf: mid, rbar: rm, iterations });
    }
    let fa = eval(lo)? - target;
    let fb = eval(hi)? - target;
    if fa * fb > 0.0 {
        return arg(format!(
            "no sign change in bracket: R̄−target = {fa:.4} at {lo:e}, {fb:.4} at {hi:e}"
        ));
    }
    let increasing = fb > fa;
    let mut best = (mid, rm);
    for step in 0..60 {
        let m = 0.5 * (a + b);
        let cf = 10f64.powf(m);
        let r = if step == 0 { rm } else { eval(cf)? };
        if step > 0 {
            iterations += 1;
        }
        best = (cf, r);
        if (r - target).abs() < tol {
            break;
        }
        if (r > target) == increasing {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(Calibration { cf: best.0, rbar: best.1, iterations })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepTable {
    pub method: Method,
    pub factors: Vec<f64>,
    pub rbar: Vec<Option<f64>>,
    pub errors: Vec<Option<String>>,
    /// Max relative deviation from the least-squares line.
    pub linear_residual: f64,
    pub increasing: bool,
    pub convex: bool,
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Runs `method` on the scattered trace scaled by each factor.
pub fn sweep_cf(scattered: &TimeSeries, method: Method, factors: &[f64], cfg: &Config) -> Result<SweepTable> {
    if factors.len() < 8 {
        return arg(format!("grid of ≥ 8 factors required, got {}", factors.len()));
    }
    if factors.iter().any(|&f| !(f > 0.0)) {
        return arg("factors must be positive");
    }
    let results: Vec<Result<f64>> = factors
        .par_iter()
        .map(|&f| match method {
            Method::Agcm => Ok(run_agcm(&AgcmData::Scattered(calibrate(scattered, f)?), cfg)?.rbar),
            Method::Glk => glk_rbar(scattered, f, cfg),
        })
        .collect();
    let rbar: Vec<Option<f64>> = results.iter().map(|r| r.as_ref().ok().copied()).collect();
    let errors = results.iter().map(|r| r.as_ref().err().map(|e| e.to_string())).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = factors
        .iter()
        .zip(&rbar)
        .filter_map(|(&f, r)| r.map(|r| (f, r)))
        .unzip();
    let (a, b) = line_fit(&xs, &ys);
    let linear_residual = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| ((y - (a + b * x)) / (a + b * x)).abs())
        .fold(0.0, f64::max);
    let complete = ys.len() == factors.len();
    let increasing = complete && ys.windows(2).all(|w| w[1] > w[0]);
    let slopes: Vec<f64> = (1..xs.len()).map(|i| (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])).collect();
    let convex = complete && slopes.windows(2).all(|w| w[1] >= w[0]);
    Ok(SweepTable { method, factors: factors.to_vec(), rbar, errors, linear_residual, increasing, convex })
}

pub fn write_sweep(table: &SweepTable, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let r: Vec<f64> = table.rbar.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    write_columns(&dir.join(format!("{stem}.csv")), &["factor", "rbar"], &[&table.factors, &r])?;
    write_json(table, &dir.join(format!("{stem}.json")))?;
    let label = match table.method {
        Method::Agcm => "AGCM",
        Method::Glk => "GLK",
    };
    emit_plot(
        &[PlotSeries::new(label, table.factors.clone(), r)],
        "Contrast versus calibration factor",
        "factor",
        "R̄",
        &dir.join(format!("{stem}.svg")),
    )
}

/// Input of a comparison run.
#[derive(Clone, Debug)]
pub enum Scenario {
    /// Known medium; each method receives data simulated from it.
    Profile(MediumProfile),
    /// Measured trace, preprocessed once and shared by both methods.
    Measured { raw: TimeSeries, placement: TargetPlacement, agcm_cf: f64, glk_cf: f64 },
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub name: String,
    pub scenario: Scenario,
    pub noise: f64,
    pub methods: Vec<Method>,
    pub background: f64,
    pub reference: Option<(f64, f64)>,
    pub out_dir: PathBuf,
    pub record_timing: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: Method,
    pub input_hash: String,
    pub rbar: Option<f64>,
    /// `R̄·ε(background)`.
    pub eps_target: Option<f64>,
    pub flagged: bool,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_s: Option<f64>,
    pub diagnostics: serde_json::Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub name: String,
    pub background: f64,
    pub reference: Option<(f64, f64)>,
    pub methods: Vec<MethodReport>,
}

fn agcm_diag(r: &AgcmResult) -> serde_json::Value {
    serde_json::json!({
        "stop": r.stop,
        "sweeps": r.sweeps,
        "layers_run": r.history.len(),
        "last_increment": r.history.last().map(|h| h.increment),
    })
}

fn glk_diag(r: &GlkResult) -> serde_json::Value {
    serde_json::json!({
        "layers": r.trace.len(),
        "beta": r.beta,
        "max_condition": r.cond.iter().copied().fold(0.0, f64::max),
        "reached_target": r.reached_target,
    })
}

enum Outcome {
    Agcm(AgcmResult),
    Glk(GlkResult),
}

/// Runs the selected methods, writes `report.json`, profiles and an overlay plot.
pub fn compare(exp: &Experiment, cfg: &Config) -> Result<ComparisonReport> {
    if exp.methods.is_empty() {
        return arg("at least one method must be selected");
    }
    std::fs::create_dir_all(&exp.out_dir)?;
    let mut reports = Vec::new();
    let mut curves = Vec::new();
    if let Scenario::Profile(p) = &exp.scenario {
        curves.push(PlotSeries::new("true", p.grid.nodes(), p.values.clone()));
    }
    let shared = match &exp.scenario {
        Scenario::Measured { raw, placement, .. } => {
            let noisy = add_noise(raw, exp.noise, cfg.seed)?;
            let (pre, _) = select_peak(&noisy, *placement, cfg.preprocess.threshold, cfg.preprocess.onset_lead)?;
            Some(pre)
        }
        Scenario::Profile(_) => None,
    };
    for &method in &exp.methods {
        let input: Result<TimeSeries> = match (&exp.scenario, method) {
            (Scenario::Profile(p), Method::Agcm) => {
                simulate_agcm_trace(p, cfg).and_then(|g| add_noise(&g, exp.noise, cfg.seed))
            }
            (Scenario::Profile(p), Method::Glk) => {
                simulate_glk_trace(p, cfg).and_then(|f| add_noise(&f, exp.noise, cfg.seed))
            }
            (Scenario::Measured { .. }, _) => Ok(shared.clone().unwrap()),
        };
        let started = std::time::Instant::now();
        let hash = input.as_ref().map(series_hash).unwrap_or_default();
        let outcome: Result<Outcome> = input.and_then(|data| match (&exp.scenario, method) {
            (Scenario::Profile(_), Method::Agcm) => run_agcm(&AgcmData::Total(data), cfg).map(Outcome::Agcm),
            (Scenario::Profile(_), Method::Glk) => run_glk(&data, cfg).map(Outcome::Glk),
            (Scenario::Measured { agcm_cf, .. }, Method::Agcm) => {
                run_agcm(&AgcmData::Scattered(calibrate(&data, *agcm_cf)?), cfg).map(Outcome::Agcm)
            }
            (Scenario::Measured { glk_cf, .. }, Method::Glk) => {
                run_glk(&glk_normalize(&data, *glk_cf)?, cfg).map(Outcome::Glk)
            }
        });
        let runtime = exp.record_timing.then(|| started.elapsed().as_secs_f64());
        let tag = match method {
            Method::Agcm => "agcm",
            Method::Glk => "glk",
        };
        let (rbar, diagnostics, error) = match outcome {
            Ok(Outcome::Agcm(r)) => {
                save_profile(&r.profile, &exp.out_dir.join(format!("eps_{tag}.csv")))?;
                curves.push(PlotSeries::new("AGCM", r.profile.grid.nodes(), r.profile.values.clone()));
                (Some(r.rbar), agcm_diag(&r), None)
            }
            Ok(Outcome::Glk(r)) => {
                save_profile(&r.profile, &exp.out_dir.join(format!("eps_{tag}.csv")))?;
                curves.push(PlotSeries::new("GLK", r.profile.grid.nodes(), r.profile.values.clone()));
                (Some(r.rbar), glk_diag(&r), None)
            }
            Err(e) => (None, serde_json::Value::Null, Some(e.to_string())),
        };
        let flagged = match (rbar, exp.reference) {
            (Some(r), Some((lo, hi))) => r < lo || r > hi,
            _ => false,
        };
        reports.push(MethodReport {
            method,
            input_hash: hash,
            rbar,
            eps_target: rbar.map(|r| r * exp.background),
            flagged,
            error,
            runtime_s: runtime,
            diagnostics,
        });
    }
    let report = ComparisonReport {
        name: exp.name.clone(),
        background: exp.background,
        reference: exp.reference,
        methods: reports,
    };
    write_json(&report, &exp.out_dir.join("report.json"))?;
    emit_plot(&curves, &exp.name, "x", "ε_r", &exp.out_dir.join("eps_overlay.svg"))?;
    Ok(report)
}

/// Writes a trace as a two-column CSV.
pub fn write_trace(series: &TimeSeries, path: &Path) -> Result<()> {
    save_series(series, path)
}
