//! Run configuration and its defaults.

use crate::error::{arg, Result};
use crate::types::Bounds;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Source position.
    pub x0: f64,
    pub s_min: f64,
    pub s_max: f64,
    /// Pseudo-frequency step.
    pub s_step: f64,
    /// Regularization parameter.
    pub alpha: f64,
    /// Inner tail iterations per layer.
    pub inner_iterations: usize,
    /// Laplace truncation time.
    pub laplace_t: f64,
    /// Calibration factor for measured signals.
    pub cf: f64,
    pub increment_tol: f64,
    pub gradient_cap: f64,
    pub max_sweeps: usize,
    pub seed: u64,
    /// Name of the noise generator; only "chacha8" is implemented.
    pub rng: String,
    pub noise: f64,
    pub bounds: Bounds,
    pub forward: ForwardConfig,
    pub agcm: AgcmConfig,
    pub glk: GlkConfig,
    pub preprocess: PreprocessConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            x0: -1.0,
            s_min: 0.5,
            s_max: 12.0,
            s_step: 0.5,
            alpha: 0.04,
            inner_iterations: 10,
            laplace_t: 4.0,
            cf: 1e-7,
            increment_tol: 1e-5,
            gradient_cap: 1e5,
            max_sweeps: 6,
            seed: 1,
            rng: "chacha8".into(),
            noise: 0.0,
            bounds: Bounds::default(),
            forward: ForwardConfig::default(),
            agcm: AgcmConfig::default(),
            glk: GlkConfig::default(),
            preprocess: PreprocessConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForwardConfig {
    /// Space step of the Cauchy leapfrog and of the Laplace BVP.
    pub dx: f64,
    /// Padding around `[x0, 1]` for the Cauchy domain.
    pub pad: f64,
    /// Travel-time step of the boundary-source solver.
    pub dz: f64,
}

impl Default for ForwardConfig {
    fn default() -> Self {
        Self { dx: 0.01, pad: 0.5, dz: 0.002 }
    }
}

/// Which s-moments enter the layer equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerScheme {
    /// Only the averages of `2s²` and `s`.
    Basic,
    /// All first-order moments of the interval average, including the lagged `q′` term.
    Full,
}

/// Point at which the gradient of the layer functional is compared with the cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientPoint {
    /// The computed minimizer `q_{n,k}`.
    Iterate,
    /// The CG start `q = 0`.
    Start,
    /// The previous iterate, under the current functional.
    Warm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgcmConfig {
    /// Step of the x-grid on `[0, 1]`.
    pub dx: f64,
    /// Weight of the boundary residuals relative to the interior operator.
    pub bc_weight: f64,
    /// One pass of 3-point smoothing of `r` before differentiation.
    pub smoothing: bool,
    /// Weights of `‖q‖²`, `‖q′‖²`, `‖q″‖²` in the H² penalty.
    pub h2_weights: [f64; 3],
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub scheme: LayerScheme,
    pub gradient_at: GradientPoint,
}

impl Default for AgcmConfig {
    fn default() -> Self {
        Self {
            dx: 0.01,
            bc_weight: 1e3,
            smoothing: true,
            h2_weights: [1.0, 1.0, 1.0],
            cg_tol: 1e-9,
            cg_max_iter: 20_000,
            scheme: LayerScheme::Full,
            gradient_at: GradientPoint::Iterate,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlkConfig {
    /// Step of the travel-time grid.
    pub hz: f64,
    /// Layers are solved until the recovered depth reaches this x.
    pub x_target: f64,
    /// Step of the output x-grid.
    pub hx_out: f64,
    /// Layers solved concurrently between depth checks.
    pub batch: usize,
}

impl Default for GlkConfig {
    fn default() -> Self {
        Self { hz: 0.004, x_target: 1.0, hx_out: 0.004, batch: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Fraction of the extremum that delimits a peak.
    pub threshold: f64,
    /// Time between the new origin and the peak onset.
    pub onset_lead: f64,
    /// Model time units per nanosecond.
    pub units_per_ns: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { threshold: 0.05, onset_lead: 1.0, units_per_ns: 1.0 }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Config = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("s_min", self.s_min),
            ("s_step", self.s_step),
            ("laplace_t", self.laplace_t),
            ("cf", self.cf),
            ("increment_tol", self.increment_tol),
            ("gradient_cap", self.gradient_cap),
            ("forward.dx", self.forward.dx),
            ("forward.dz", self.forward.dz),
            ("agcm.dx", self.agcm.dx),
            ("agcm.bc_weight", self.agcm.bc_weight),
            ("glk.hz", self.glk.hz),
            ("glk.hx_out", self.glk.hx_out),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return arg(format!("{name}={v} must be positive"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return arg(format!("alpha={} must lie in (0,1)", self.alpha));
        }
        if !(self.s_max > self.s_min) {
            return arg("s_max must exceed s_min");
        }
        let n = (self.s_max - self.s_min) / self.s_step;
        if (n - n.round()).abs() > 1e-9 {
            return arg("s_step must divide [s_min, s_max]");
        }
        if !(0.0..1.0).contains(&self.noise) {
            return arg(format!("noise={} must lie in [0,1)", self.noise));
        }
        if self.rng != "chacha8" {
            return arg(format!("unknown rng '{}'", self.rng));
        }
        if self.inner_iterations == 0 || self.max_sweeps == 0 {
            return arg("inner_iterations and max_sweeps must be positive");
        }
        if !(self.bounds.d0 > 0.0 && self.bounds.d0 <= 1.0 && self.bounds.d1 >= 1.0) {
            return arg("bounds must satisfy 0 < d0 ≤ 1 ≤ d1");
        }
        Ok(())
    }

    /// Number of layers of the s-partition.
    pub fn layers(&self) -> usize {
        ((self.s_max - self.s_min) / self.s_step).round() as usize
    }
}
