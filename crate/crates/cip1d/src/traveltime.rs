//! Travel-time coordinate `z = ∫₀ˣ √ε`.

use crate::error::{Error, Result};
use crate::types::MediumProfile;
use serde::{Deserialize, Serialize};

/// Monotone map between depth `x ≥ 0` and travel time `z`, tabulated at nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TravelTimeMap {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

impl TravelTimeMap {
    /// Cumulative trapezoid of `√ε` over the profile nodes in `x ≥ 0`.
    pub fn from_profile(profile: &MediumProfile) -> Result<Self> {
        let mut x = vec![0.0];
        x.extend(profile.grid.nodes().into_iter().filter(|&v| v > 1e-12));
        let mut z = vec![0.0];
        let mut prev = check(profile.eval(0.0), 0)?.sqrt();
        for i in 1..x.len() {
            let cur = check(profile.eval(x[i]), i)?.sqrt();
            z.push(z[i - 1] + 0.5 * (prev + cur) * (x[i] - x[i - 1]));
            prev = cur;
        }
        if x.len() < 2 {
            x.push(1.0);
            z.push(1.0);
        }
        Ok(Self { x, z })
    }

    /// Map from values of ε sampled on a uniform z-grid: `x = ∫₀ᶻ ε^{-1/2}`.
    pub fn from_z_samples(hz: f64, eps: &[f64]) -> Result<Self> {
        let mut x = vec![0.0];
        let mut z = vec![0.0];
        for i in 1..eps.len() {
            let a = check(eps[i - 1], i - 1)?;
            let b = check(eps[i], i)?;
            x.push(x[i - 1] + 0.5 * hz * (a.powf(-0.5) + b.powf(-0.5)));
            z.push(i as f64 * hz);
        }
        Ok(Self { x, z })
    }

    pub fn z_at(&self, x: f64) -> f64 {
        interp_ext(&self.x, &self.z, x)
    }

    pub fn x_at(&self, z: f64) -> f64 {
        interp_ext(&self.z, &self.x, z)
    }

    /// `x(z_n)` on the uniform grid `z_n = n·hz`, n = 0..=m.
    pub fn x_on_grid(&self, hz: f64, m: usize) -> Vec<f64> {
        (0..=m).map(|n| self.x_at(n as f64 * hz)).collect()
    }
}

fn check(v: f64, i: usize) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Nonpositive(format!("ε={v} at node {i}")))
    }
}

/// Piecewise-linear interpolation on increasing `xs`, continued with unit slope.
pub(crate) fn interp_ext(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0] + (x - xs[0]);
    }
    if x >= xs[n - 1] {
        return ys[n - 1] + (x - xs[n - 1]);
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}

/// Linear interpolation on increasing `xs`, clamped to the end values.
pub(crate) fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, n - 1);
    let t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + t * (ys[i] - ys[i - 1])
}
