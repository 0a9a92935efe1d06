//! Layer stripping in pseudo-frequency with tail iterations.

use crate::config::{Config, GradientPoint, LayerScheme};
use crate::error::{arg, Error, Result};
use crate::forward::{laplace_transform, solve_laplace_bvp, w0};
use crate::linalg::{cg, CgReport, SymBand};
use crate::types::{Bounds, MediumProfile, SpatialGrid, SpectralSeries, TimeSeries};
use serde::{Deserialize, Serialize};

/// Boundary functions on the s-nodes `s_n = s̄ − n·h`, n = 0..=N (descending s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub s: Vec<f64>,
    pub gbar: Vec<f64>,
    pub phi0: Vec<f64>,
    pub phi1: Vec<f64>,
    /// `ψ₀` of layer n: `(φ₀(s_{n−1}) − φ₀(s_n))/h`; entry 0 repeats entry 1.
    pub psi0: Vec<f64>,
    pub psi1: Vec<f64>,
    pub rho: Vec<f64>,
}

pub fn boundary_data(gbar: &SpectralSeries, x0: f64) -> Result<BoundaryData> {
    let n = gbar.n;
    let h = gbar.h();
    let s: Vec<f64> = (0..=n).map(|i| gbar.s(n - i)).collect();
    let g: Vec<f64> = (0..=n).map(|i| gbar.values[n - i]).collect();
    if let Some(i) = g.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Nonpositive(format!("ḡ({})={}", s[i], g[i])));
    }
    let phi0: Vec<f64> = s
        .iter()
        .zip(&g)
        .map(|(&s, &g)| (g / w0(0.0, s, x0)).ln() / (s * s))
        .collect();
    let phi1: Vec<f64> = s
        .iter()
        .zip(&g)
        .map(|(&s, &g)| 2.0 / s - (s * x0).exp() / (s * s * g))
        .collect();
    let diff = |p: &[f64]| -> Vec<f64> {
        let mut d: Vec<f64> = (1..=n).map(|i| (p[i - 1] - p[i]) / h).collect();
        d.insert(0, d[0]);
        d
    };
    let rho = s.iter().zip(&g).map(|(&s, &g)| s * g - (s * x0).exp()).collect();
    Ok(BoundaryData { psi0: diff(&phi0), psi1: diff(&phi1), s, gbar: g, phi0, phi1, rho })
}

/// Interval averages of the s-dependent coefficients over `(s_n, s_{n−1}]`, σ = s_{n−1} − s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerMoments {
    /// ⟨2s²⟩
    pub a1: f64,
    /// ⟨s⟩
    pub a2: f64,
    /// ⟨4sσ⟩
    pub b: f64,
    /// ⟨2σ⟩
    pub s2: f64,
    /// ⟨2sσ² − 2s²σ⟩
    pub c: f64,
}

impl LayerMoments {
    pub fn new(s_lo: f64, s_hi: f64) -> Self {
        let (a, b, h) = (s_lo, s_hi, s_hi - s_lo);
        let mean_s2 = (b.powi(3) - a.powi(3)) / (3.0 * h);
        Self {
            a1: 2.0 * mean_s2,
            a2: 0.5 * (a + b),
            b: 4.0 * (b * 0.5 * (a + b) - mean_s2),
            s2: h,
            c: -b * b * h + 2.0 * b * h * h - h.powi(3),
        }
    }
}

/// Moments for every layer n = 1..=N of the partition `s_n = s̄ − n·h`.
pub fn stripping_coefficients(s_max: f64, h: f64, layers: usize) -> Vec<LayerMoments> {
    (1..=layers)
        .map(|n| LayerMoments::new(s_max - n as f64 * h, s_max - (n - 1) as f64 * h))
        .collect()
}

/// Second-order first derivative, one-sided at the ends.
pub fn d1(q: &[f64], dx: f64) -> Vec<f64> {
    let n = q.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (q[i + 1] - q[i - 1]) / (2.0 * dx);
    }
    d[0] = (-1.5 * q[0] + 2.0 * q[1] - 0.5 * q[2]) / dx;
    d[n - 1] = (0.5 * q[n - 3] - 2.0 * q[n - 2] + 1.5 * q[n - 1]) / dx;
    d
}

pub fn d2(q: &[f64], dx: f64) -> Vec<f64> {
    let n = q.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (q[i + 1] - 2.0 * q[i] + q[i - 1]) / (dx * dx);
    }
    d[0] = d[1];
    d[n - 1] = d[n - 2];
    d
}

/// Discrete QRM functional for `q″ − a(x)q′ = P` on `[0,1]` with the
/// over-determined conditions `q(0)`, `q′(0)`, `q′(1)` as weighted residuals.
#[derive(Clone, Debug)]
pub struct QrmProblem<'a> {
    pub dx: f64,
    pub coef: &'a [f64],
    pub rhs: &'a [f64],
    /// Targets for `q(0)`, `q′(0)`, `q′(1)`.
    pub bc: [f64; 3],
    pub alpha: f64,
    pub weight: f64,
    pub h2: [f64; 3],
}

#[derive(Clone, Debug)]
pub struct QrmSolution {
    pub q: Vec<f64>,
    pub cg: CgReport,
    /// L₂ norm of the functional's gradient at the CG start point (q = 0).
    pub gradient_start: f64,
    /// The same at the returned minimizer.
    pub gradient_end: f64,
    pub objective: f64,
}

fn bc_rows(n: usize, dx: f64) -> [Vec<(usize, f64)>; 3] {
    [
        vec![(0, 1.0)],
        vec![(0, -1.5 / dx), (1, 2.0 / dx), (2, -0.5 / dx)],
        vec![(n - 3, 0.5 / dx), (n - 2, -2.0 / dx), (n - 1, 1.5 / dx)],
    ]
}

fn operator_row(p: &QrmProblem, i: usize) -> [(usize, f64); 3] {
    let (dx, a) = (p.dx, p.coef[i]);
    [
        (i - 1, 1.0 / (dx * dx) + a / (2.0 * dx)),
        (i, -2.0 / (dx * dx)),
        (i + 1, 1.0 / (dx * dx) - a / (2.0 * dx)),
    ]
}

fn add_outer(m: &mut SymBand, row: &[(usize, f64)], w: f64) {
    for &(i, a) in row {
        for &(j, b) in row {
            if i <= j {
                m.add(i, j, w * a * b);
            }
        }
    }
}

/// Normal equations `A q = b` of the functional (J = qᵀAq − 2bᵀq + const).
pub fn qrm_system(p: &QrmProblem) -> Result<(SymBand, Vec<f64>)> {
    let n = p.coef.len();
    if n < 5 || p.rhs.len() != n {
        return arg("QRM needs at least 5 nodes and matching coefficient arrays");
    }
    let dx = p.dx;
    let mut a = SymBand::zeros(n, 2);
    let mut b = vec![0.0; n];
    for i in 1..n - 1 {
        let row = operator_row(p, i);
        add_outer(&mut a, &row, dx);
        for &(j, v) in &row {
            b[j] += dx * v * p.rhs[i];
        }
    }
    let [w0, w1, w2] = p.h2;
    for i in 0..n {
        a.add(i, i, p.alpha * w0 * dx);
    }
    for i in 0..n - 1 {
        add_outer(&mut a, &[(i, -1.0 / dx), (i + 1, 1.0 / dx)], p.alpha * w1 * dx);
    }
    for i in 1..n - 1 {
        let r = [(i - 1, 1.0 / (dx * dx)), (i, -2.0 / (dx * dx)), (i + 1, 1.0 / (dx * dx))];
        add_outer(&mut a, &r, p.alpha * w2 * dx);
    }
    for (row, &g) in bc_rows(n, dx).iter().zip(&p.bc) {
        add_outer(&mut a, row, p.weight);
        for &(j, v) in row {
            b[j] += p.weight * v * g;
        }
    }
    Ok((a, b))
}

/// Value of the functional at `q`.
pub fn qrm_objective(p: &QrmProblem, q: &[f64]) -> f64 {
    let n = q.len();
    let dx = p.dx;
    let apply = |row: &[(usize, f64)]| row.iter().map(|&(j, v)| v * q[j]).sum::<f64>();
    let mut j = 0.0;
    for i in 1..n - 1 {
        j += dx * (apply(&operator_row(p, i)) - p.rhs[i]).powi(2);
    }
    let [w0, w1, w2] = p.h2;
    let d = d2(q, dx);
    j += p.alpha * w0 * dx * q.iter().map(|v| v * v).sum::<f64>();
    j += p.alpha * w1 * dx * (0..n - 1).map(|i| ((q[i + 1] - q[i]) / dx).powi(2)).sum::<f64>();
    j += p.alpha * w2 * dx * d[1..n - 1].iter().map(|v| v * v).sum::<f64>();
    for (row, &g) in bc_rows(n, dx).iter().zip(&p.bc) {
        j += p.weight * (apply(row) - g).powi(2);
    }
    j
}

fn gradient_norm(a: &SymBand, b: &[f64], q: &[f64], dx: f64) -> f64 {
    let mut aq = vec![0.0; q.len()];
    a.mul(q, &mut aq);
    let ss: f64 = aq.iter().zip(b).map(|(x, y)| (2.0 * (x - y)).powi(2)).sum();
    (ss / dx).sqrt()
}

/// Gradient norm of the functional at `q`.
pub fn qrm_gradient(p: &QrmProblem, q: &[f64]) -> Result<f64> {
    let (a, b) = qrm_system(p)?;
    Ok(gradient_norm(&a, &b, q, p.dx))
}

/// Minimizes the functional by conjugate gradients from `q = 0`.
pub fn qrm_solve(p: &QrmProblem, tol: f64, max_iter: usize, track: bool) -> Result<QrmSolution> {
    let (a, b) = qrm_system(p)?;
    let n = b.len();
    let mut q = vec![0.0; n];
    let gradient_start = gradient_norm(&a, &b, &q, p.dx);
    let report = cg(&a, &b, &mut q, tol, max_iter, track);
    if !report.converged {
        return Err(Error::Singular(format!(
            "CG stagnated after {} iterations (residual {:.3e}); α may be too small",
            report.iterations, report.residual_end
        )));
    }
    let gradient_end = gradient_norm(&a, &b, &q, p.dx);
    let objective = qrm_objective(p, &q);
    Ok(QrmSolution { q, cg: report, gradient_start, gradient_end, objective })
}

/// `ε = 1 + r″ + s²r′² − 2sr′` in `(0,1)`, 1 at the ends, clamped to `[d₀, d₁)`.
///
/// Returns the profile values and the number of clamped nodes.
pub fn reconstruct_eps(r: &[f64], s: f64, dx: f64, smoothing: bool, bounds: Bounds) -> (Vec<f64>, usize) {
    let n = r.len();
    let mut rs = r.to_vec();
    if smoothing {
        for i in 1..n - 1 {
            rs[i] = (r[i - 1] + r[i] + r[i + 1]) / 3.0;
        }
    }
    let rp = d1(&rs, dx);
    let rpp = d2(&rs, dx);
    let hi = bounds.d1 - 1e-9;
    let mut clamped = 0;
    let mut eps = vec![1.0; n];
    for i in 1..n - 1 {
        let e = 1.0 + rpp[i] + s * s * rp[i] * rp[i] - 2.0 * s * rp[i];
        let c = if e.is_nan() { bounds.d0 } else { e.clamp(bounds.d0, hi) };
        if c != e {
            clamped += 1;
        }
        eps[i] = c;
    }
    (eps, clamped)
}

/// `r = −h·q − h·Σq_j + V`.
pub fn layer_r(q: &[f64], q_sum: &[f64], tail: &[f64], h: f64) -> Vec<f64> {
    (0..q.len()).map(|i| -h * q[i] - h * q_sum[i] + tail[i]).collect()
}

/// Tail `V = s̄⁻² ln(w/w₀)` on the nodes of `[0,1]` for the given ε values there.
pub fn update_tail(eps: &[f64], s_bar: f64, x0: f64, s_min: f64) -> Result<Vec<f64>> {
    let n = eps.len();
    let grid = SpatialGrid::new(0.0, 1.0, n)?;
    let dx = grid.step();
    let profile = MediumProfile::unchecked(grid, eps.to_vec())?;
    let field = solve_laplace_bvp(&profile, s_bar, x0, s_min, dx)?;
    let w = field.on_unit_interval(n);
    Ok((0..n)
        .map(|i| (w[i] / w0(grid.x(i), s_bar, x0)).ln() / (s_bar * s_bar))
        .collect())
}

/// First tail `p̄/s̄`, `p̄` the QRM solution of `p″ = 0`, `p(0) = −s̄²ψ₀`, `p′(0) = −s̄²ψ₁`, `p′(1) = 0`.
pub fn first_tail(psi0: f64, psi1: f64, s_bar: f64, alpha: f64, n: usize, cfg: &Config) -> Result<Vec<f64>> {
    if !(s_bar > 1.0) {
        return arg(format!("s̄={s_bar} must exceed 1"));
    }
    let dx = 1.0 / (n - 1) as f64;
    let zeros = vec![0.0; n];
    let p = QrmProblem {
        dx,
        coef: &zeros,
        rhs: &zeros,
        bc: [-s_bar * s_bar * psi0, -s_bar * s_bar * psi1, 0.0],
        alpha,
        weight: cfg.agcm.bc_weight,
        h2: cfg.agcm.h2_weights,
    };
    let sol = qrm_solve(&p, cfg.agcm.cg_tol, cfg.agcm.cg_max_iter, false)?;
    Ok(sol.q.into_iter().map(|v| v / s_bar).collect())
}

/// Coefficient and right-hand side of the layer equation `q″ − a q′ = P`.
pub fn layer_equation(
    m: &LayerMoments,
    scheme: LayerScheme,
    j: &[f64],
    vp: &[f64],
    lagged_qp: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = j.len();
    let mut a = vec![0.0; n];
    let mut p = vec![0.0; n];
    for i in 0..n {
        a[i] = match scheme {
            LayerScheme::Basic => m.a1 * j[i] - m.a1 * vp[i] + 2.0 * m.a2,
            LayerScheme::Full => {
                m.a1 * j[i] - m.b * j[i] + 2.0 * m.a2 - m.s2 - m.a1 * vp[i] + m.b * vp[i]
                    - m.c * lagged_qp[i]
            }
        };
        p[i] = -2.0 * m.a2 * j[i] * j[i] + 4.0 * m.a2 * vp[i] * j[i] - 2.0 * m.a2 * vp[i] * vp[i]
            - 2.0 * j[i]
            + 2.0 * vp[i];
    }
    (a, p)
}

/// Contrast: max if ε ≥ 1 everywhere, min if ε < 1 everywhere, otherwise the
/// extremum farthest from 1.
pub fn rbar(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= 1.0 {
        max
    } else if max < 1.0 {
        min
    } else if max - 1.0 >= 1.0 - min {
        max
    } else {
        min
    }
}

/// Input accepted by [`run_agcm`].
#[derive(Clone, Debug)]
pub enum AgcmData {
    /// Full trace `g(t) = u(0,t)` of the point-source problem, direct wave included.
    Total(TimeSeries),
    /// Scattered part `g(t) − H(t−|x₀|)/2`, e.g. a calibrated measured peak.
    Scattered(TimeSeries),
    /// `ḡ(s)` on the configured s-grid.
    Laplace(SpectralSeries),
}

/// `ḡ = e^{−s|x₀|}/(2s) + L_T(g₁)`: the direct wave is transformed exactly.
pub fn laplace_data(data: &AgcmData, cfg: &Config) -> Result<SpectralSeries> {
    let n = cfg.layers();
    let direct = |s: f64| w0(0.0, s, cfg.x0);
    let scattered = match data {
        AgcmData::Laplace(g) => {
            if g.n != n || (g.s_min - cfg.s_min).abs() > 1e-12 || (g.s_max - cfg.s_max).abs() > 1e-12 {
                return arg("ḡ must be given on the configured s-grid");
            }
            return Ok(g.clone());
        }
        AgcmData::Scattered(g) => g.clone(),
        AgcmData::Total(g) => {
            let front = cfg.x0.abs();
            g.map(|t, v| {
                let hv = if (t - front).abs() <= 1e-9 * g.dt {
                    0.25
                } else if t > front {
                    0.5
                } else {
                    0.0
                };
                v - hv
            })
        }
    };
    let mut gbar = laplace_transform(&scattered, cfg.s_min, cfg.s_max, n, cfg.laplace_t)?;
    for i in 0..=n {
        gbar.values[i] += direct(gbar.s(i));
    }
    Ok(gbar)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `‖ε⁽ⁿ⁾ − ε⁽ⁿ⁻¹⁾‖ ≤ tol`.
    Increment,
    /// Gradient norm reached the cap; the previous iterate is returned.
    Gradient,
    /// Neither test fired within the sweep limit.
    MaxSweeps,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerRecord {
    pub sweep: usize,
    pub layer: usize,
    pub s: f64,
    pub increment: f64,
    pub objective: Vec<f64>,
    pub gradient_start: Vec<f64>,
    pub gradient_end: Vec<f64>,
    pub gradient_warm: Vec<f64>,
    pub cg_iterations: Vec<usize>,
    pub clamped: usize,
}

/// State of the layer sweep.
#[derive(Clone, Debug)]
pub struct AgcmState {
    pub s: Vec<f64>,
    pub h: f64,
    /// Accepted `q_j`, j = 1..n (q₀ ≡ 0 is implicit).
    pub q: Vec<Vec<f64>>,
    pub tail: Vec<f64>,
    pub eps: Vec<f64>,
    pub sweep: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AgcmResult {
    pub profile: MediumProfile,
    pub stop: StopReason,
    pub sweeps: usize,
    pub rbar: f64,
    pub history: Vec<LayerRecord>,
    /// Profile at the end of every completed sweep.
    pub sweep_profiles: Vec<Vec<f64>>,
    pub first_tail: Vec<f64>,
    pub boundary: BoundaryData,
}

fn l2_dist(a: &[f64], b: &[f64], dx: f64) -> f64 {
    (dx * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).sqrt()
}

pub fn run_agcm(data: &AgcmData, cfg: &Config) -> Result<AgcmResult> {
    cfg.validate()?;
    let gbar = laplace_data(data, cfg)?;
    let bd = boundary_data(&gbar, cfg.x0)?;
    let grid = SpatialGrid::with_step(0.0, 1.0, cfg.agcm.dx)?;
    let nx = grid.n_points;
    let dx = grid.step();
    let h = cfg.s_step;
    let layers = cfg.layers();
    let moments = stripping_coefficients(cfg.s_max, h, layers);
    let v11 = first_tail(bd.psi0[0], bd.psi1[0], cfg.s_max, cfg.alpha, nx, cfg)?;

    let mut st = AgcmState {
        s: bd.s.clone(),
        h,
        q: Vec::new(),
        tail: v11.clone(),
        eps: vec![1.0; nx],
        sweep: 0,
    };
    let mut history = Vec::new();
    let mut sweep_profiles = Vec::new();
    let mut stop = StopReason::MaxSweeps;

    'sweeps: for sweep in 1..=cfg.max_sweeps {
        st.sweep = sweep;
        st.q.clear();
        let mut q_sum = vec![0.0; nx];
        let mut q_prev = vec![0.0; nx];
        for n in 1..=layers {
            let s_n = bd.s[n];
            let m = &moments[n - 1];
            let jv: Vec<f64> = d1(&q_sum, dx).into_iter().map(|v| h * v).collect();
            let mut lagged = q_prev.clone();
            let mut rec = LayerRecord {
                sweep,
                layer: n,
                s: s_n,
                increment: f64::NAN,
                objective: Vec::new(),
                gradient_start: Vec::new(),
                gradient_end: Vec::new(),
                gradient_warm: Vec::new(),
                cg_iterations: Vec::new(),
                clamped: 0,
            };
            let mut eps_prev_inner = st.eps.clone();
            let mut q = vec![0.0; nx];
            let mut eps = st.eps.clone();
            for k in 1..=cfg.inner_iterations {
                let vp = d1(&st.tail, dx);
                let (coef, rhs) = layer_equation(m, cfg.agcm.scheme, &jv, &vp, &d1(&lagged, dx));
                let prob = QrmProblem {
                    dx,
                    coef: &coef,
                    rhs: &rhs,
                    bc: [bd.psi0[n], bd.psi1[n], 0.0],
                    alpha: cfg.alpha,
                    weight: cfg.agcm.bc_weight,
                    h2: cfg.agcm.h2_weights,
                };
                let sol = qrm_solve(&prob, cfg.agcm.cg_tol, cfg.agcm.cg_max_iter, false)?;
                rec.objective.push(sol.objective);
                rec.gradient_start.push(sol.gradient_start);
                rec.gradient_end.push(sol.gradient_end);
                let warm = qrm_gradient(&prob, &lagged)?;
                rec.gradient_warm.push(warm);
                let gradient = match cfg.agcm.gradient_at {
                    GradientPoint::Iterate => sol.gradient_end,
                    GradientPoint::Start => sol.gradient_start,
                    GradientPoint::Warm => warm,
                };
                rec.cg_iterations.push(sol.cg.iterations);
                if gradient >= cfg.gradient_cap {
                    st.eps = eps_prev_inner;
                    stop = StopReason::Gradient;
                    history.push(rec);
                    break 'sweeps;
                }
                q = sol.q;
                let r = layer_r(&q, &q_sum, &st.tail, h);
                let (e, clamped) = reconstruct_eps(&r, s_n, dx, cfg.agcm.smoothing, cfg.bounds);
                rec.clamped = clamped;
                eps_prev_inner = e.clone();
                eps = e;
                lagged = q.clone();
                if k < cfg.inner_iterations {
                    st.tail = update_tail(&eps, cfg.s_max, cfg.x0, cfg.s_min)?;
                }
            }
            for i in 0..nx {
                q_sum[i] += q[i];
            }
            q_prev = q.clone();
            st.q.push(q);
            rec.increment = l2_dist(&eps, &st.eps, dx);
            st.eps = eps;
            let done = rec.increment <= cfg.increment_tol;
            history.push(rec);
            if done {
                stop = StopReason::Increment;
                sweep_profiles.push(st.eps.clone());
                break 'sweeps;
            }
        }
        sweep_profiles.push(st.eps.clone());
    }

    let profile = MediumProfile::unchecked(grid, st.eps.clone())?;
    let rb = rbar(&st.eps[1..nx - 1]);
    Ok(AgcmResult {
        profile,
        stop,
        sweeps: st.sweep,
        rbar: rb,
        history,
        sweep_profiles,
        first_tail: v11,
        boundary: bd,
    })
}
