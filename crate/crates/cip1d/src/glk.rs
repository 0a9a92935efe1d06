//! Gelfand–Levitan–Krein inversion in the travel-time coordinate.

use crate::config::Config;
use crate::error::{arg, Error, Result};
use crate::linalg::Lu;
use crate::traveltime::{interp_clamped, TravelTimeMap};
use crate::types::{MediumProfile, SpatialGrid, TimeSeries};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Regular part of `f̂′` on `k·h_z`, stored for `k ≥ 0`; even in `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlkKernel {
    pub hz: f64,
    pub values: Vec<f64>,
}

impl GlkKernel {
    pub fn at(&self, k: isize) -> f64 {
        self.values[k.unsigned_abs()]
    }

    /// Largest layer index the kernel supports.
    pub fn max_layer(&self) -> usize {
        (self.values.len() - 1) / 2
    }
}

/// Central differences of `f` resampled on `t_k = k·h_z`, k = 0..=q.
///
/// At `k = 0` the one-sided value `(f(t₁) − f(0⁺))/h_z` is used, so the jump of `f̂`
/// at the origin (a delta in `f̂′`) is excluded. The last entry is one-sided.
pub fn build_kernel(f: &TimeSeries, hz: f64, q: usize) -> Result<GlkKernel> {
    if q < 2 {
        return arg("kernel needs at least 3 samples");
    }
    if f.t0.abs() > 1e-9 * f.dt {
        return arg("boundary trace must start at t=0");
    }
    if (q as f64) * hz > f.t_end() + 1e-9 * f.dt {
        return arg(format!(
            "trace ends at t={} but the kernel needs t={}",
            f.t_end(),
            q as f64 * hz
        ));
    }
    let v = f.resample(0.0, hz, q + 1)?;
    let mut values = vec![0.0; q + 1];
    values[0] = (v[1] - v[0]) / hz;
    for k in 1..q {
        values[k] = (v[k + 1] - v[k - 1]) / (2.0 * hz);
    }
    values[q] = (v[q] - v[q - 1]) / hz;
    Ok(GlkKernel { hz, values })
}

fn layer_matrix(kernel: &GlkKernel, n: usize) -> Vec<f64> {
    let m = 2 * n + 1;
    let c = 0.5 * kernel.hz;
    let mut a = vec![0.0; m * m];
    for k in 0..m {
        for j in 0..m {
            let w = if n == 0 { 0.0 } else if j == 0 || j == m - 1 { 0.5 } else { 1.0 };
            a[k * m + j] = -c * w * kernel.at(k as isize - j as isize);
        }
        a[k * m + k] += 1.0;
    }
    a
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSolution {
    /// `w(z_n, t_k)`, k = −n..=n.
    pub w: Vec<f64>,
    /// Estimated 1-norm condition number of the layer system.
    pub cond: f64,
}

impl LayerSolution {
    /// `w(z_n, z_n⁻)`.
    pub fn trace(&self) -> f64 {
        self.w[self.w.len() - 1]
    }
}

/// Trapezoid discretization of `w − ½∫_{−z}^{z} f̂′(t−τ)w dτ = ½` at `z = n·h_z`, solved by LU.
pub fn solve_glk_layer(kernel: &GlkKernel, n: usize) -> Result<LayerSolution> {
    if n > kernel.max_layer() {
        return arg(format!("layer {n} beyond kernel support {}", kernel.max_layer()));
    }
    let m = 2 * n + 1;
    let lu = Lu::factor(layer_matrix(kernel, n), m)
        .map_err(|e| Error::Singular(format!("layer z={}: {e}", n as f64 * kernel.hz)))?;
    let w = lu.solve(&vec![0.5; m]);
    Ok(LayerSolution { w, cond: lu.cond1_estimate() })
}

/// Same system by the resolvent (Neumann) series; `None` if it does not converge.
pub fn solve_glk_layer_neumann(kernel: &GlkKernel, n: usize, tol: f64, max_iter: usize) -> Option<Vec<f64>> {
    let m = 2 * n + 1;
    let a = layer_matrix(kernel, n);
    let mut w = vec![0.5; m];
    for _ in 0..max_iter {
        let next: Vec<f64> = (0..m)
            .map(|k| {
                let row = &a[k * m..(k + 1) * m];
                let off: f64 = row.iter().zip(&w).enumerate().map(|(j, (x, y))| {
                    if j == k { (x - 1.0) * y } else { x * y }
                }).sum();
                0.5 - off
            })
            .collect();
        let diff = next.iter().zip(&w).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        w = next;
        if diff <= tol {
            return Some(w);
        }
        if !diff.is_finite() {
            return None;
        }
    }
    None
}

/// `‖(h_z/2)·W·K‖_∞` for layer n; the resolvent series converges when it is below 1.
pub fn beta(kernel: &GlkKernel, n: usize) -> f64 {
    let a = layer_matrix(kernel, n);
    let m = 2 * n + 1;
    (0..m)
        .map(|k| {
            (0..m)
                .map(|j| if j == k { (a[k * m + j] - 1.0).abs() } else { a[k * m + j].abs() })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// `ε = 16·w⁴(z, z⁻)` for every layer.
pub fn recover_eps(trace: &[f64]) -> Result<Vec<f64>> {
    trace
        .iter()
        .enumerate()
        .map(|(n, &w)| {
            if w > 0.0 && w.is_finite() {
                Ok(16.0 * w.powi(4))
            } else {
                Err(Error::Nonpositive(format!("trace w={w} at layer {n}")))
            }
        })
        .collect()
}

/// `f̄(t) = −(f(t) + 1)/4`.
pub fn fbar(f: &TimeSeries) -> TimeSeries {
    f.map(|_, v| -0.25 * (v + 1.0))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlkResult {
    /// ε on a uniform x-grid starting at 0.
    pub profile: MediumProfile,
    pub hz: f64,
    pub eps_z: Vec<f64>,
    pub x_of_z: Vec<f64>,
    pub trace: Vec<f64>,
    pub cond: Vec<f64>,
    /// `‖(h_z/2)·W·K‖_∞` of the deepest layer.
    pub beta: f64,
    pub reached_target: bool,
    pub rbar: f64,
    #[serde(skip)]
    pub solutions: Vec<Vec<f64>>,
}

/// Solves layers until the recovered depth reaches `x_target` or the data run out.
pub fn run_glk(f: &TimeSeries, cfg: &Config) -> Result<GlkResult> {
    let hz = cfg.glk.hz;
    let q_max = ((f.t_end() + 1e-9 * f.dt) / hz).floor() as usize;
    let m_max = q_max / 2;
    if m_max < 1 {
        return arg("trace too short for a single layer");
    }
    let kernel = build_kernel(f, hz, 2 * m_max)?;
    let batch = cfg.glk.batch.max(1);
    let mut sols: Vec<LayerSolution> = Vec::new();
    let mut eps_z: Vec<f64> = Vec::new();
    let mut x_of_z: Vec<f64> = Vec::new();
    let mut reached = false;
    let mut next = 0;
    'outer: while next <= m_max {
        let end = (next + batch).min(m_max + 1);
        let part: Vec<LayerSolution> = (next..end)
            .into_par_iter()
            .map(|n| solve_glk_layer(&kernel, n))
            .collect::<Result<_>>()?;
        for sol in part {
            let e = recover_eps(&[sol.trace()])
                .map_err(|_| Error::Nonpositive(format!("trace {} at z={}", sol.trace(), sols.len() as f64 * hz)))?[0];
            let x = match (x_of_z.last(), eps_z.last()) {
                (Some(&x), Some(&ep)) => x + 0.5 * hz * (ep.powf(-0.5) + e.powf(-0.5)),
                _ => 0.0,
            };
            eps_z.push(e);
            x_of_z.push(x);
            sols.push(sol);
            if x >= cfg.glk.x_target {
                reached = true;
                break 'outer;
            }
        }
        next = end;
    }
    let x_end = if reached { cfg.glk.x_target } else { *x_of_z.last().unwrap() };
    if !(x_end > 0.0) {
        return arg("recovered depth is zero");
    }
    let grid = SpatialGrid::with_step(0.0, x_end, cfg.glk.hx_out.min(x_end / 2.0))?;
    let values: Vec<f64> = grid.nodes().iter().map(|&x| interp_clamped(&x_of_z, &eps_z, x)).collect();
    let interior: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(&values)
        .filter(|(&x, _)| x > 0.0 && x < 1.0)
        .map(|(_, &v)| v)
        .collect();
    let rb = crate::agcm::rbar(&interior);
    let beta = beta(&kernel, sols.len() - 1);
    Ok(GlkResult {
        profile: MediumProfile::unchecked(grid, values)?,
        hz,
        trace: sols.iter().map(|s| s.trace()).collect(),
        cond: sols.iter().map(|s| s.cond).collect(),
        solutions: sols.into_iter().map(|s| s.w).collect(),
        eps_z,
        x_of_z,
        beta,
        reached_target: reached,
        rbar: rb,
    })
}

/// Travel-time map rebuilt from ε recovered on the z-grid.
pub fn recovered_map(result: &GlkResult) -> Result<TravelTimeMap> {
    TravelTimeMap::from_z_samples(result.hz, &result.eps_z)
}

/// Travel-time map of a known profile.
pub fn travel_time(profile: &MediumProfile) -> Result<TravelTimeMap> {
    TravelTimeMap::from_profile(profile)
}
