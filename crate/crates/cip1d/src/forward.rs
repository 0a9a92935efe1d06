//! Forward solvers: Cauchy problem with a point source, boundary-source problem,
//! and the Laplace-domain boundary value problem.

use crate::error::{arg, Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::traveltime::TravelTimeMap;
use crate::types::{MediumProfile, SpectralSeries, TimeSeries};
use serde::{Deserialize, Serialize};

/// `ε u_tt = u_xx` on a truncated line, `u(x,0)=0`, `u_t(x,0)=δ(x−x₀)`.
#[derive(Clone, Debug)]
pub struct CauchySimulation {
    pub profile: MediumProfile,
    pub x0: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_end: f64,
}

impl CauchySimulation {
    /// Domain `[x₀−pad, 1+pad]` snapped to multiples of `dx`; `dt = dx·min√ε`.
    pub fn new(profile: &MediumProfile, x0: f64, t_end: f64, dx: f64, pad: f64) -> Result<Self> {
        if !(dx > 0.0) || !(t_end > 0.0) {
            return arg("dx and t_end must be positive");
        }
        let x_left = ((x0.min(0.0) - pad) / dx).floor() * dx;
        let x_right = ((1.0f64.max(x0) + pad) / dx).ceil() * dx;
        let mut sim = Self {
            profile: profile.clone(),
            x0,
            x_left,
            x_right,
            dx,
            dt: 0.0,
            t_end,
        };
        sim.dt = dx * sim.eps().iter().copied().fold(f64::INFINITY, f64::min).sqrt();
        Ok(sim)
    }

    pub fn n_nodes(&self) -> usize {
        ((self.x_right - self.x_left) / self.dx).round() as usize + 1
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_left + i as f64 * self.dx
    }

    pub fn eps(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.profile.eval(self.x(i))).collect()
    }

    fn node(&self, x: f64) -> usize {
        ((x - self.x_left) / self.dx).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let eps = self.eps();
        if let Some(i) = eps.iter().position(|&e| !(e > 0.0)) {
            return Err(Error::Nonpositive(format!("ε at node {i}")));
        }
        let limit = self.dx * eps.iter().copied().fold(f64::INFINITY, f64::min).sqrt();
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt: self.dt, limit });
        }
        if self.x0 <= self.x_left || self.x0 >= self.x_right {
            return arg(format!("source x0={} outside the grid", self.x0));
        }
        if eps[0] != 1.0 || eps[eps.len() - 1] != 1.0 {
            return arg("ε must equal 1 at the truncation edges");
        }
        Ok(())
    }
}

/// Explicit leapfrog integrator for a [`CauchySimulation`].
pub struct CauchyStepper {
    prev: Vec<f64>,
    cur: Vec<f64>,
    coef: Vec<f64>,
    eps: Vec<f64>,
    nu: f64,
    dx: f64,
    dt: f64,
    pub step: usize,
}

impl CauchyStepper {
    pub fn new(sim: &CauchySimulation) -> Result<Self> {
        sim.validate()?;
        let n = sim.n_nodes();
        let eps = sim.eps();
        let (dx, dt) = (sim.dx, sim.dt);
        let coef = eps.iter().map(|e| (dt / dx).powi(2) / e).collect();
        // First step by d'Alembert applied to a hat-shaped delta of height 1/dx.
        let src = sim.node(sim.x0);
        let c = 1.0 / eps[src].sqrt();
        let reach = c * dt;
        let cur = (0..n)
            .map(|i| {
                let d = sim.x(i) - sim.x(src);
                (hat_integral(d + reach, dx) - hat_integral(d - reach, dx)) / (2.0 * c)
            })
            .collect();
        Ok(Self { prev: vec![0.0; n], cur, coef, eps, nu: dt / dx, dx, dt, step: 1 })
    }

    pub fn current(&self) -> &[f64] {
        &self.cur
    }

    pub fn previous(&self) -> &[f64] {
        &self.prev
    }

    pub fn advance(&mut self) {
        let n = self.cur.len();
        let (u, um) = (&self.cur, &self.prev);
        let mut next = vec![0.0; n];
        for i in 1..n - 1 {
            next[i] = 2.0 * u[i] - um[i] + self.coef[i] * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
        }
        next[0] = u[0] + self.nu * (u[1] - u[0]);
        next[n - 1] = u[n - 1] - self.nu * (u[n - 1] - u[n - 2]);
        self.prev = std::mem::replace(&mut self.cur, next);
        self.step += 1;
    }

    /// Discrete energy between the previous and the current time level.
    pub fn energy(&self) -> f64 {
        let (u, um) = (&self.cur, &self.prev);
        let n = u.len();
        let kinetic: f64 = (0..n)
            .map(|i| self.eps[i] * ((u[i] - um[i]) / self.dt).powi(2))
            .sum();
        let strain: f64 = (0..n - 1)
            .map(|i| (u[i + 1] - u[i]) * (um[i + 1] - um[i]) / (self.dx * self.dx))
            .sum();
        0.5 * (kinetic + strain) * self.dx
    }
}

/// ∫_{-∞}^{y} of the hat with support `[-h, h]` and peak `1/h`.
fn hat_integral(y: f64, h: f64) -> f64 {
    let y = y.clamp(-h, h);
    if y < 0.0 {
        (y + h).powi(2) / (2.0 * h * h)
    } else {
        0.5 + (h * y - 0.5 * y * y) / (h * h)
    }
}

#[derive(Clone, Debug)]
pub struct CauchyOutput {
    /// `g(t) = u(0,t)`.
    pub trace: TimeSeries,
    pub x: Vec<f64>,
    /// Field at the final time level.
    pub field: Vec<f64>,
}

pub fn solve_cauchy(sim: &CauchySimulation) -> Result<CauchyOutput> {
    let mut st = CauchyStepper::new(sim)?;
    let iz = sim.node(0.0);
    let nt = (sim.t_end / sim.dt).round() as usize;
    let mut g = Vec::with_capacity(nt + 1);
    g.push(0.0);
    g.push(st.current()[iz]);
    while st.step < nt {
        st.advance();
        g.push(st.current()[iz]);
    }
    let x = (0..sim.n_nodes()).map(|i| sim.x(i)).collect();
    Ok(CauchyOutput { trace: TimeSeries::new(0.0, sim.dt, g)?, x, field: st.cur })
}

/// `ε u_tt = u_xx` for `x > 0` with `u_x(0,t) = δ(t)`, solved in the travel-time variable.
#[derive(Clone, Debug)]
pub struct BoundarySimulation {
    pub profile: MediumProfile,
    /// Travel-time step; the time step equals it.
    pub dz: f64,
    pub t_end: f64,
    pub map: TravelTimeMap,
    pub z_end: f64,
}

impl BoundarySimulation {
    pub fn new(profile: &MediumProfile, t_end: f64, dz: f64) -> Result<Self> {
        if !(dz > 0.0) || !(t_end > 0.0) {
            return arg("dz and t_end must be positive");
        }
        let e0 = profile.eval(0.0);
        if (e0 - 1.0).abs() > 1e-12 {
            return arg(format!("ε(0)={e0} must equal 1"));
        }
        let map = TravelTimeMap::from_profile(profile)?;
        let depth = profile.grid.x_max.max(1.0);
        let z_end = ((map.z_at(depth) + 0.5) / dz).ceil() * dz;
        Ok(Self { profile: profile.clone(), dz, t_end, map, z_end })
    }
}

/// Returns `f(t) = u(0,t)` on `t_k = k·dz`, with `f(t₀) = f(0⁺)`.
///
/// The impulse is split over the first two steps, which centres it at `dz/2`;
/// samples are the average of the two neighbouring time levels.
pub fn solve_boundary(sim: &BoundarySimulation) -> Result<TimeSeries> {
    let dz = sim.dz;
    let n = (sim.z_end / dz).round() as usize + 1;
    let half: Vec<f64> = (0..n - 1)
        .map(|i| sim.profile.eval(sim.map.x_at((i as f64 + 0.5) * dz)).sqrt())
        .collect();
    let mut node = vec![0.0; n];
    node[0] = sim.profile.eval(0.0).sqrt();
    for i in 1..n - 1 {
        node[i] = 0.5 * (half[i - 1] + half[i]);
    }
    node[n - 1] = half[n - 2];
    let nt = (sim.t_end / dz).round() as usize;
    let mut um = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut trace0 = Vec::with_capacity(nt + 2);
    for k in 0..=nt + 1 {
        let b = if k < 2 { 0.5 / dz } else { 0.0 };
        let mut un = vec![0.0; n];
        for i in 1..n - 1 {
            un[i] = 2.0 * u[i] - um[i]
                + (half[i] * (u[i + 1] - u[i]) - half[i - 1] * (u[i] - u[i - 1])) / node[i];
        }
        un[0] = 2.0 * u[0] - um[0] + 2.0 * (half[0] * (u[1] - u[0]) - node[0] * dz * b) / node[0];
        un[n - 1] = u[n - 2];
        um = std::mem::replace(&mut u, un);
        trace0.push(u[0]);
    }
    // trace0[k] = u at time level k+1.
    let mut f = Vec::with_capacity(nt + 1);
    f.push(trace0[0]);
    for k in 1..=nt {
        f.push(0.5 * (trace0[k - 1] + trace0[k]));
    }
    TimeSeries::new(0.0, dz, f)
}

/// Solution of `w″ − s²ε w = −δ(x−x₀)` on the truncated line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceField {
    pub s: f64,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl LaplaceField {
    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// Value at the node nearest to `x`.
    pub fn at(&self, x: f64) -> f64 {
        let i = ((x - self.x[0]) / self.dx()).round() as usize;
        self.w[i.min(self.w.len() - 1)]
    }

    /// Values at the nodes `x = i·dx`, i = 0..n, which must lie on the grid.
    pub fn on_unit_interval(&self, n: usize) -> Vec<f64> {
        let i0 = (-self.x[0] / self.dx()).round() as usize;
        self.w[i0..i0 + n].to_vec()
    }
}

/// Fundamental solution for ε ≡ 1.
pub fn w0(x: f64, s: f64, x0: f64) -> f64 {
    (-s * (x - x0).abs()).exp() / (2.0 * s)
}

/// Exact-in-each-cell three-point scheme on `[x₀−2/s̲, 1+2/s̲]` with outgoing Robin ends.
///
/// Cell values of ε are the averages of the two end nodes; in a cell with wavenumber
/// `k = s√ε` the discrete relation between neighbours is the exact one for constant ε.
pub fn solve_laplace_bvp(
    profile: &MediumProfile,
    s: f64,
    x0: f64,
    s_min: f64,
    dx: f64,
) -> Result<LaplaceField> {
    if !(s >= s_min && s_min > 0.0) {
        return arg(format!("s={s} must satisfy s ≥ s_min={s_min} > 0"));
    }
    let il = ((x0.min(0.0) - 2.0 / s_min) / dx).floor() as i64;
    let ir = ((1.0f64.max(x0) + 2.0 / s_min) / dx).ceil() as i64;
    let n = (ir - il + 1) as usize;
    let x: Vec<f64> = (0..n).map(|i| (il + i as i64) as f64 * dx).collect();
    let eps: Vec<f64> = x.iter().map(|&v| profile.eval(v)).collect();
    let mut lo = vec![0.0; n];
    let mut di = vec![0.0; n];
    let mut up = vec![0.0; n];
    for c in 0..n - 1 {
        let e = 0.5 * (eps[c] + eps[c + 1]);
        if !(e > 0.0) {
            return Err(Error::Nonpositive(format!("ε in cell {c}")));
        }
        let k = s * e.sqrt();
        let kd = k * dx;
        let a = k / kd.sinh();
        let b = k / kd.tanh();
        di[c] -= b;
        up[c] = a;
        di[c + 1] -= b;
        lo[c + 1] = a;
    }
    di[0] -= s;
    di[n - 1] -= s;
    let mut rhs = vec![0.0; n];
    let src = ((x0 - x[0]) / dx).round() as usize;
    rhs[src] = -1.0;
    let w = solve_tridiagonal(&lo, &di, &up, &rhs)?;
    if let Some(i) = w.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Nonpositive(format!(
            "w={} at x={}; truncation domain too small",
            w[i], x[i]
        )));
    }
    Ok(LaplaceField { s, x, w })
}

/// Trapezoid approximation of `∫₀ᵀ g(t)e^{−st}dt`; the signal is taken as 0 before its first sample.
pub fn laplace_at(series: &TimeSeries, s: f64, t_max: f64) -> Result<f64> {
    if t_max > series.t_end() + 1e-9 * series.dt {
        return arg(format!("T={t_max} exceeds data end {}", series.t_end()));
    }
    let f = |t: f64, v: f64| v * (-s * t).exp();
    let start = series.t0.max(0.0);
    let mut acc = 0.0;
    let mut t_prev = start;
    let mut v_prev = f(start, series.value_at(start).unwrap_or(0.0));
    for i in 0..series.len() {
        let t = series.t(i);
        if t <= start + 1e-12 * series.dt {
            continue;
        }
        let (t, v) = if t >= t_max {
            (t_max, series.value_at(t_max).unwrap_or(0.0))
        } else {
            (t, series.samples[i])
        };
        let fv = f(t, v);
        acc += 0.5 * (t - t_prev) * (fv + v_prev);
        t_prev = t;
        v_prev = fv;
        if t >= t_max {
            break;
        }
    }
    Ok(acc)
}

pub fn laplace_transform(
    series: &TimeSeries,
    s_min: f64,
    s_max: f64,
    n: usize,
    t_max: f64,
) -> Result<SpectralSeries> {
    let h = (s_max - s_min) / n as f64;
    let values = (0..=n)
        .map(|i| laplace_at(series, s_min + i as f64 * h, t_max))
        .collect::<Result<Vec<_>>>()?;
    SpectralSeries::new(s_min, s_max, n, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::SpatialGrid;

    #[test]
    fn hat_integral_is_a_cdf() {
        let h = 0.1;
        assert_eq!(hat_integral(-1.0, h), 0.0);
        assert!((hat_integral(0.0, h) - 0.5).abs() < 1e-15);
        assert!((hat_integral(1.0, h) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_rejects_nonunit_surface() {
        let g = SpatialGrid::new(0.0, 1.0, 11).unwrap();
        let p = MediumProfile::unchecked(g, vec![2.0; 11]).unwrap();
        assert!(BoundarySimulation::new(&p, 1.0, 0.01).is_err());
    }
}
