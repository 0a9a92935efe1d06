//! Noise injection, peak selection, calibration and odd extension of traces.

use crate::error::{arg, Error, Result};
use crate::types::TimeSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Multiplicative noise `g(tᵢ)(1 + σξᵢ)`, ξᵢ uniform on (−1,1) from ChaCha8 seeded with `seed`.
pub fn add_noise(series: &TimeSeries, sigma: f64, seed: u64) -> Result<TimeSeries> {
    if !(0.0..1.0).contains(&sigma) {
        return arg(format!("noise level {sigma} must lie in [0,1)"));
    }
    if sigma == 0.0 {
        return Ok(series.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = series
        .samples
        .iter()
        .map(|&v| {
            let xi = loop {
                let x: f64 = rng.gen_range(-1.0..1.0);
                if x != -1.0 {
                    break x;
                }
            };
            v * (1.0 + sigma * xi)
        })
        .collect();
    Ok(TimeSeries { t0: series.t0, dt: series.dt, samples })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetPlacement {
    Air,
    Buried,
}

impl std::str::FromStr for TargetPlacement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "air" => Ok(Self::Air),
            "buried" => Ok(Self::Buried),
            _ => arg(format!("unknown placement '{s}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSelection {
    pub i_start: usize,
    pub i_end: usize,
    pub extremum_index: usize,
    pub extremum_value: f64,
    /// Time of the onset sample in the input time axis.
    pub onset_time: f64,
    /// Input time that becomes `t = 0`.
    pub new_origin: f64,
}

/// Interior local extrema of `v`; plateaus report their first sample.
fn local_extrema(v: &[f64]) -> Vec<usize> {
    let n = v.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && v[j + 1] == v[i] {
            j += 1;
        }
        let left = if i == 0 { None } else { Some(v[i - 1]) };
        let right = if j + 1 == n { None } else { Some(v[j + 1]) };
        if let (Some(l), Some(r)) = (left, right) {
            if (l > v[i] && r > v[i]) || (l < v[i] && r < v[i]) {
                out.push(i);
            }
        }
        i = j + 1;
    }
    out
}

/// Keeps the earliest peak of largest amplitude and moves the time origin
/// `lead` before its onset.
///
/// Candidates are negative extrema for a target in the air and all extrema for a
/// buried target. The peak extends in both directions while the signal keeps the
/// extremum's sign and at least `threshold·|extremum|` in magnitude.
pub fn select_peak(
    series: &TimeSeries,
    placement: TargetPlacement,
    threshold: f64,
    lead: f64,
) -> Result<(TimeSeries, PeakSelection)> {
    let v = &series.samples;
    let mut best: Option<usize> = None;
    for i in local_extrema(v) {
        let ok = match placement {
            TargetPlacement::Air => v[i] < 0.0,
            TargetPlacement::Buried => v[i] != 0.0,
        };
        if ok && !best.is_some_and(|b| v[i].abs() <= v[b].abs()) {
            best = Some(i);
        }
    }
    let k = best.ok_or_else(|| Error::Argument("no candidate peak in signal".into()))?;
    let ext = v[k];
    let inside = |x: f64| x * ext.signum() >= threshold * ext.abs();
    let mut i_start = k;
    while i_start > 0 && inside(v[i_start - 1]) {
        i_start -= 1;
    }
    let mut i_end = k;
    while i_end + 1 < v.len() && inside(v[i_end + 1]) {
        i_end += 1;
    }
    let onset_time = series.t(i_start);
    let new_origin = onset_time - lead;
    let first = (0..v.len()).find(|&i| series.t(i) - new_origin >= -1e-9 * series.dt).unwrap_or(0);
    let samples: Vec<f64> = (first..v.len())
        .map(|i| if i >= i_start && i <= i_end { v[i] } else { 0.0 })
        .collect();
    let out = TimeSeries::new(series.t(first) - new_origin, series.dt, samples)?;
    Ok((
        out,
        PeakSelection {
            i_start,
            i_end,
            extremum_index: k,
            extremum_value: ext,
            onset_time,
            new_origin,
        },
    ))
}

pub fn calibrate(series: &TimeSeries, cf: f64) -> Result<TimeSeries> {
    if !(cf > 0.0) || !cf.is_finite() {
        return arg(format!("calibration factor {cf} must be positive"));
    }
    Ok(series.map(|_, v| cf * v))
}

/// `f := −1 + CF·F`, adding the direct-wave term expected by the boundary-source model.
pub fn glk_normalize(series: &TimeSeries, cf: f64) -> Result<TimeSeries> {
    Ok(calibrate(series, cf)?.map(|_, v| v - 1.0))
}

/// Odd extension of `f` given on `t_k = k·dt`, k ≥ 0; `values[K + k] = f̂(t_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OddExtension {
    pub dt: f64,
    pub half: usize,
    pub values: Vec<f64>,
}

impl OddExtension {
    pub fn at(&self, k: isize) -> f64 {
        self.values[(self.half as isize + k) as usize]
    }
}

pub fn extend_odd(series: &TimeSeries) -> Result<OddExtension> {
    if series.t0.abs() > 1e-12 * series.dt {
        return arg("odd extension needs a series starting at t=0");
    }
    let k = series.len() - 1;
    let mut values = vec![0.0; 2 * k + 1];
    for i in 1..=k {
        values[k + i] = series.samples[i];
        values[k - i] = -series.samples[i];
    }
    Ok(OddExtension { dt: series.dt, half: k, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extrema_skip_monotone_runs() {
        let v = [0.0, -1.0, -3.0, -1.0, 0.0, 2.0, 2.0, 1.0];
        assert_eq!(local_extrema(&v), vec![2, 5]);
    }
}
