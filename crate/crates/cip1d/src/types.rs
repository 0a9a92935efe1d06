//! Grids, profiles and sampled series shared by every solver.

use crate::error::{arg, Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform grid on `[x_min, x_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::Grid(format!("n_points={n_points} < 3")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::Grid(format!("empty interval [{x_min}, {x_max}]")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Grid with spacing as close as possible to `h`.
    pub fn with_step(x_min: f64, x_max: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Grid(format!("step {h} must be positive")));
        }
        let n = ((x_max - x_min) / h).round() as usize + 1;
        Self::new(x_min, x_max, n)
    }

    pub fn step(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }
}

/// Admissible range `[d0, d1)` for the dielectric constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub d0: f64,
    pub d1: f64,
}

impl Default for Bounds {
    fn default() -> Self {
        Self { d0: 0.1, d1: 30.0 }
    }
}

/// Relative dielectric constant sampled on a uniform grid; equal to 1 off `(0,1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediumProfile {
    pub grid: SpatialGrid,
    pub values: Vec<f64>,
}

impl MediumProfile {
    /// Validated constructor using the default bounds.
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        Self::with_bounds(grid, values, Bounds::default())
    }

    pub fn with_bounds(grid: SpatialGrid, values: Vec<f64>, bounds: Bounds) -> Result<Self> {
        let p = Self::unchecked(grid, values)?;
        p.validate(bounds)?;
        Ok(p)
    }

    /// No range checks; used for reconstructions, which may leave the admissible class.
    pub fn unchecked(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::Grid(format!(
                "{} values for {} grid points",
                values.len(),
                grid.n_points
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    /// ε ≡ 1 on the given grid.
    pub fn homogeneous(grid: SpatialGrid) -> Self {
        Self { grid, values: vec![1.0; grid.n_points] }
    }

    /// Piecewise-constant inclusion `value` on `[a, b]` (nodes included), 1 elsewhere.
    pub fn step(grid: SpatialGrid, a: f64, b: f64, value: f64) -> Result<Self> {
        let tol = 1e-9 * grid.step();
        Self::from_fn(grid, |x| if x >= a - tol && x <= b + tol { value } else { 1.0 })
    }

    pub fn validate(&self, bounds: Bounds) -> Result<()> {
        for (i, (&x, &v)) in self.grid.nodes().iter().zip(&self.values).enumerate() {
            if !v.is_finite() || v < bounds.d0 || v >= bounds.d1 {
                return Err(Error::Invariant {
                    index: i,
                    reason: format!("ε={v} outside [{}, {})", bounds.d0, bounds.d1),
                });
            }
            if (x <= 0.0 || x >= 1.0) && v != 1.0 {
                return Err(Error::Invariant {
                    index: i,
                    reason: format!("ε={v} ≠ 1 at x={x} outside (0,1)"),
                });
            }
        }
        Ok(())
    }

    /// Linear interpolation, 1 outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x < g.x_min || x > g.x_max {
            return 1.0;
        }
        let u = (x - g.x_min) / g.step();
        let i = (u.floor() as usize).min(g.n_points - 2);
        let t = u - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Uniformly sampled signal `samples[i] = f(t0 + i·dt)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub samples: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::ShortSeries(samples.len()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return arg(format!("time step {dt} must be positive"));
        }
        Ok(Self { t0, dt, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.samples.len() - 1)
    }

    /// Linear interpolation; `None` outside the sampled interval.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let u = (t - self.t0) / self.dt;
        let last = (self.samples.len() - 1) as f64;
        if u < -1e-9 || u > last + 1e-9 {
            return None;
        }
        let u = u.clamp(0.0, last);
        let i = (u.floor() as usize).min(self.samples.len() - 2);
        let w = u - i as f64;
        Some(self.samples[i] * (1.0 - w) + self.samples[i + 1] * w)
    }

    /// Samples on `t0' + k·dt'`, k = 0..n, by linear interpolation.
    pub fn resample(&self, t0: f64, dt: f64, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|k| {
                let t = t0 + k as f64 * dt;
                self.value_at(t).ok_or_else(|| {
                    Error::Argument(format!(
                        "t={t} outside series range [{}, {}]",
                        self.t0,
                        self.t_end()
                    ))
                })
            })
            .collect()
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let samples = self.samples.iter().enumerate().map(|(i, &v)| f(self.t(i), v)).collect();
        Self { t0: self.t0, dt: self.dt, samples }
    }
}

/// Function of pseudo-frequency on a uniform grid with `n` subintervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSeries {
    pub s_min: f64,
    pub s_max: f64,
    pub n: usize,
    pub values: Vec<f64>,
}

impl SpectralSeries {
    pub fn new(s_min: f64, s_max: f64, n: usize, values: Vec<f64>) -> Result<Self> {
        if !(s_min > 0.0) {
            return arg(format!("s_min={s_min} must be positive"));
        }
        if !(s_max > s_min) {
            return arg(format!("s_max={s_max} must exceed s_min={s_min}"));
        }
        if n == 0 || values.len() != n + 1 {
            return arg(format!("{} values for {n} subintervals", values.len()));
        }
        Ok(Self { s_min, s_max, n, values })
    }

    /// Evaluates `f` at every node.
    pub fn from_fn(s_min: f64, s_max: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = (s_max - s_min) / n as f64;
        let values = (0..=n).map(|i| f(s_min + i as f64 * h)).collect();
        Self::new(s_min, s_max, n, values)
    }

    pub fn h(&self) -> f64 {
        (self.s_max - self.s_min) / self.n as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        if i == self.n {
            self.s_max
        } else {
            self.s_min + i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.s(i)).collect()
    }
}
