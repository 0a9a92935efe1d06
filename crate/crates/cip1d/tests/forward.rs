use cip1d::forward::*;
use cip1d::glk::fbar;
use cip1d::{Error, MediumProfile, SpatialGrid, TimeSeries};

fn unit_grid(n: usize) -> SpatialGrid {
    SpatialGrid::new(0.0, 1.0, n).unwrap()
}

fn step(a: f64, b: f64, v: f64) -> MediumProfile {
    MediumProfile::step(unit_grid(251), a, b, v).unwrap()
}

fn trace(p: &MediumProfile, t_end: f64, dx: f64) -> TimeSeries {
    solve_cauchy(&CauchySimulation::new(p, -1.0, t_end, dx, 0.5).unwrap()).unwrap().trace
}

#[test]
fn homogeneous_trace_is_half_heaviside() {
    let dx = 0.01;
    let g = trace(&MediumProfile::homogeneous(unit_grid(101)), 4.0, dx);
    assert!((g.value_at(2.0).unwrap() - 0.5).abs() < 0.01);
    assert!(g.value_at(0.5).unwrap().abs() < 1e-12);
    for i in 0..g.len() {
        let t = g.t(i);
        let v = g.samples[i];
        if t < 1.0 - 4.0 * dx {
            assert!(v.abs() < 0.01, "early signal {v} at t={t}");
        }
        if t > 1.0 + 4.0 * dx {
            assert!((v - 0.5).abs() < 0.01, "plateau {v} at t={t}");
        }
    }
}

#[test]
fn homogeneous_scattered_part_vanishes() {
    let dx = 0.01;
    let g = trace(&MediumProfile::homogeneous(unit_grid(101)), 4.0, dx);
    for i in 0..g.len() {
        let t = g.t(i);
        if (t - 1.0).abs() > 4.0 * dx {
            let g1 = g.samples[i] - if t > 1.0 { 0.5 } else { 0.0 };
            assert!(g1.abs() < 1e-9, "g1={g1} at t={t}");
        }
    }
}

#[test]
fn interface_reflection_matches_characteristics() {
    // Incident step 1/2 at t=1; reflection off 1→4 at x=0.5 returns at t=2 with
    // coefficient (1−√4)/(1+√4) = −1/3; the next arrival is at t=4.
    let p = MediumProfile::step(unit_grid(201), 0.5, 0.995, 4.0).unwrap();
    let g = trace(&p, 4.0, 0.005);
    for t in [2.2, 2.6, 3.0, 3.4, 3.8] {
        let v = g.value_at(t).unwrap();
        let want = 0.5 * (1.0 - 1.0 / 3.0);
        assert!((v - want).abs() < 0.02 * want, "g({t})={v}, want {want}");
    }
}

#[test]
fn cfl_violation_is_rejected() {
    let mut sim = CauchySimulation::new(&step(0.3, 0.6, 4.0), -1.0, 1.0, 0.01, 0.5).unwrap();
    assert!((sim.dt - 0.02).abs() < 1e-12 || sim.dt <= 0.01 + 1e-15);
    sim.dt = 0.011;
    assert!(matches!(solve_cauchy(&sim), Err(Error::Cfl { .. })));
}

#[test]
fn source_outside_grid_is_rejected() {
    let mut sim = CauchySimulation::new(&step(0.3, 0.6, 4.0), -1.0, 1.0, 0.01, 0.5).unwrap();
    sim.x0 = -10.0;
    assert!(solve_cauchy(&sim).is_err());
}

#[test]
fn energy_is_conserved_before_the_edges() {
    let p = MediumProfile::homogeneous(unit_grid(101));
    let sim = CauchySimulation::new(&p, -1.0, 1.0, 0.01, 0.5).unwrap();
    let mut st = CauchyStepper::new(&sim).unwrap();
    st.advance();
    let e0 = st.energy();
    // Fronts reach the nearest edge (distance 0.5) after 50 steps.
    for _ in 0..40 {
        st.advance();
        let e = st.energy();
        assert!((e - e0).abs() <= 1e-10 * e0, "energy {e} vs {e0}");
    }
}

#[test]
fn trace_laplace_error_shrinks_quadratically() {
    let p = MediumProfile::homogeneous(unit_grid(101));
    let t_max = 8.0;
    let err = |dx: f64| {
        let g = trace(&p, t_max, dx);
        [1.0f64, 2.0, 5.0]
            .iter()
            .map(|&s| {
                let exact = (-s).exp() / (2.0 * s) - (-s * t_max).exp() / (2.0 * s);
                ((laplace_at(&g, s, t_max).unwrap() - exact) / exact).abs()
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.02), err(0.01));
    assert!(e1 / e2 >= 3.0, "errors {e1:e} → {e2:e}");
}

/// `H(t−1)/2` sampled with `H(0) = 1/2`, jump at sample `at`.
fn half_step(i: usize, at: usize) -> f64 {
    match i.cmp(&at) {
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => 0.25,
        std::cmp::Ordering::Greater => 0.5,
    }
}

#[test]
fn laplace_of_direct_wave() {
    let dt = 0.001;
    let g = TimeSeries::new(0.0, dt, (0..=30_000).map(|i| half_step(i, 1000)).collect())
        .unwrap();
    let s: f64 = 2.0;
    let v = laplace_at(&g, s, 30.0).unwrap();
    let exact = (-s).exp() / (2.0 * s);
    assert!(((v - exact) / exact).abs() < 1e-3);
}

#[test]
fn laplace_of_zero_series_is_zero() {
    let g = TimeSeries::new(0.0, 0.01, vec![0.0; 500]).unwrap();
    let l = laplace_transform(&g, 0.5, 12.0, 23, 4.0).unwrap();
    assert!(l.values.iter().all(|&v| v == 0.0));
}

#[test]
fn truncation_error_is_bounded_by_tail_integral() {
    let dt = 0.001;
    let g = TimeSeries::new(0.0, dt, (0..=5000).map(|i| half_step(i, 1000)).collect())
        .unwrap();
    let s: f64 = 0.5;
    let exact = (-s).exp() / (2.0 * s);
    let bound = 0.5 * (-s * 4.0).exp() / s;
    let err = (laplace_at(&g, s, 4.0).unwrap() - exact).abs();
    assert!(err <= bound * (1.0 + 1e-3), "err {err} bound {bound}");
    assert!(err >= 0.99 * bound);
}

#[test]
fn laplace_rejects_truncation_beyond_data() {
    let g = TimeSeries::new(0.0, 0.01, vec![0.0; 101]).unwrap();
    assert!(laplace_at(&g, 1.0, 2.0).is_err());
}

#[test]
fn bvp_matches_fundamental_solution() {
    let p = MediumProfile::homogeneous(unit_grid(101));
    for s in [1.0, 2.0, 5.0, 12.0] {
        let f = solve_laplace_bvp(&p, s, -1.0, 0.5, 0.01).unwrap();
        let got = f.at(0.0);
        let want = w0(0.0, s, -1.0);
        assert!(((got - want) / want).abs() < 1e-3, "s={s}: {got} vs {want}");
        let at_src = f.at(-1.0);
        assert!(((at_src - 0.5 / s) / (0.5 / s)).abs() < 1e-3);
    }
    let f = solve_laplace_bvp(&p, 2.0, -1.0, 0.5, 0.01).unwrap();
    assert!((f.at(0.0) - (-2.0f64).exp() / 4.0).abs() / 0.033834 < 1e-3);
}

#[test]
fn bvp_solution_is_positive() {
    for p in [step(0.3, 0.6, 4.0), step(0.2, 0.4, 0.5), step(0.1, 0.9, 25.0)] {
        for s in [0.5, 1.0, 3.0, 12.0] {
            let f = solve_laplace_bvp(&p, s, -1.0, 0.5, 0.01).unwrap();
            assert!(f.w.iter().all(|&v| v > 0.0));
        }
    }
}

#[test]
fn bvp_rejects_small_s() {
    let p = step(0.3, 0.6, 4.0);
    assert!(solve_laplace_bvp(&p, 0.4, -1.0, 0.5, 0.01).is_err());
}

#[test]
fn laplace_and_time_domain_agree() {
    for p in [step(0.3, 0.6, 4.0), step(0.2, 0.5, 2.0)] {
        let g = trace(&p, 14.0, 0.005);
        for s in [1.0, 2.0, 3.0, 5.0] {
            let w = solve_laplace_bvp(&p, s, -1.0, 0.5, 0.005).unwrap().at(0.0);
            let l = laplace_at(&g, s, 14.0).unwrap();
            assert!(((w - l) / w).abs() < 0.01, "s={s}: bvp {w} vs trace {l}");
        }
    }
}

#[test]
fn boundary_trace_of_homogeneous_medium_is_minus_one() {
    let p = MediumProfile::homogeneous(unit_grid(101));
    let f = solve_boundary(&BoundarySimulation::new(&p, 2.0, 0.002).unwrap()).unwrap();
    assert!(f.samples.iter().all(|&v| (v + 1.0).abs() < 1e-12));
    assert_eq!(f.samples[0], -1.0);
}

#[test]
fn boundary_trace_of_step_has_single_bump() {
    // Impedances 1 → 2: the up-going reflection is +1/3 and doubles at the free
    // surface, so f = −1/3 from the first return (0.6) until the surface multiple
    // comes back at 1.2 adding 2·(−1/3)(1/3).
    let f = solve_boundary(&BoundarySimulation::new(&step(0.3, 0.6, 4.0), 2.5, 0.002).unwrap()).unwrap();
    let fb = fbar(&f);
    for t in [0.1, 0.3, 0.55] {
        assert!(fb.value_at(t).unwrap().abs() < 1e-9);
    }
    for t in [0.65, 0.9, 1.15] {
        assert!((fb.value_at(t).unwrap() + 1.0 / 6.0).abs() < 1e-3, "f̄({t})");
    }
    assert!((f.value_at(1.5).unwrap() + 5.0 / 9.0).abs() < 1e-3);
}

#[test]
fn boundary_trace_is_causal() {
    let p = step(0.3, 0.6, 4.0);
    let a = solve_boundary(&BoundarySimulation::new(&p, 1.5, 0.002).unwrap()).unwrap();
    let b = solve_boundary(&BoundarySimulation::new(&p, 3.0, 0.002).unwrap()).unwrap();
    for i in 0..a.len() {
        assert!((a.samples[i] - b.samples[i]).abs() <= 1e-12);
    }
}

#[test]
fn boundary_problem_needs_unit_surface_permittivity() {
    let grid = SpatialGrid::new(-0.5, 1.0, 16).unwrap();
    let p = MediumProfile::unchecked(grid, vec![2.0; 16]).unwrap();
    assert!(BoundarySimulation::new(&p, 1.0, 0.002).is_err());
}
