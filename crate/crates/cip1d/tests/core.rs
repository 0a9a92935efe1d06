use cip1d::io::{load_profile, load_spectral, load_time_series, save_profile, save_series};
use cip1d::{Bounds, Config, Error, MediumProfile, SpatialGrid, SpectralSeries, TimeSeries};
use std::fs;

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn grid_rejects_degenerate_input() {
    assert!(SpatialGrid::new(0.0, 1.0, 2).is_err());
    assert!(SpatialGrid::new(1.0, 0.0, 10).is_err());
    let g = SpatialGrid::new(0.0, 1.0, 251).unwrap();
    assert!((g.step() - 0.004).abs() < 1e-15);
}

#[test]
fn constant_profile_loads() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("x,eps_r\n");
    for i in 0..=30 {
        text += &format!("{},1.0\n", -1.0 + 0.1 * i as f64);
    }
    let p = load_profile(&write(&dir, "p.csv", &text)).unwrap();
    assert_eq!(p.values.len(), 31);
    assert!(p.values.iter().all(|&v| v == 1.0));
    assert!((p.grid.x_min + 1.0).abs() < 1e-12 && (p.grid.x_max - 2.0).abs() < 1e-12);
}

#[test]
fn step_profile_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let grid = SpatialGrid::new(0.0, 1.0, 251).unwrap();
    let p = MediumProfile::step(grid, 0.3, 0.6, 4.0).unwrap();
    let path = dir.path().join("step.csv");
    save_profile(&p, &path).unwrap();
    let q = load_profile(&path).unwrap();
    assert_eq!(p.values, q.values);
    assert_eq!(p.grid.n_points, q.grid.n_points);
}

#[test]
fn zero_permittivity_is_an_invariant_violation() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "bad.csv", "x,eps_r\n0,1\n0.25,1\n0.5,0.0\n0.75,1\n1,1\n");
    match load_profile(&path) {
        Err(Error::Invariant { index, .. }) => assert_eq!(index, 2),
        other => panic!("expected invariant violation, got {other:?}"),
    }
    let msg = load_profile(&path).unwrap_err().to_string();
    assert!(msg.contains("invariant violation"), "{msg}");
}

#[test]
fn permittivity_outside_unit_interval_must_be_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "bad.csv", "x,eps_r\n-0.5,2\n0,1\n0.5,2\n1,1\n");
    assert!(matches!(load_profile(&path), Err(Error::Invariant { index: 0, .. })));
}

#[test]
fn upper_bound_is_exclusive() {
    let grid = SpatialGrid::new(0.0, 1.0, 5).unwrap();
    let b = Bounds::default();
    assert!(MediumProfile::with_bounds(grid, vec![1.0, 29.9, 29.9, 29.9, 1.0], b).is_ok());
    assert!(MediumProfile::with_bounds(grid, vec![1.0, 30.0, 1.0, 1.0, 1.0], b).is_err());
}

#[test]
fn non_uniform_abscissa_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "nu.csv", "x,eps_r\n0,1\n0.1,1\n0.3,1\n0.4,1\n");
    assert!(matches!(load_profile(&path), Err(Error::Parse { .. })));
}

#[test]
fn malformed_number_reports_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "m.csv", "t,value\n0,1\n1,abc\n");
    let msg = load_time_series(&path).unwrap_err().to_string();
    assert!(msg.contains("row 3"), "{msg}");
}

#[test]
fn short_series_cannot_be_built_or_saved() {
    assert!(matches!(TimeSeries::new(0.0, 0.1, vec![]), Err(Error::ShortSeries(0))));
    assert!(TimeSeries::new(0.0, 0.1, vec![1.0]).is_err());
    let grid = SpatialGrid::new(0.0, 1.0, 3).unwrap();
    let p = MediumProfile::homogeneous(grid);
    let dir = tempfile::tempdir().unwrap();
    save_profile(&p, &dir.path().join("ok.csv")).unwrap();
}

#[test]
fn time_series_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let samples: Vec<f64> = (0..500).map(|i| ((i as f64) * 0.37).sin() * 1e-3 + (i as f64).sqrt()).collect();
    let s = TimeSeries::new(0.25, 0.01, samples.clone()).unwrap();
    let path = dir.path().join("s.csv");
    save_series(&s, &path).unwrap();
    let r = load_time_series(&path).unwrap();
    assert_eq!(r.samples, samples);
    assert!((r.t0 - 0.25).abs() <= 1e-15);
    assert!((r.dt - 0.01).abs() <= 1e-15 * 0.01 * 10.0);
}

#[test]
fn radar_sampling_step_is_preserved() {
    let dir = tempfile::tempdir().unwrap();
    let s = TimeSeries::new(0.0, 0.133, (0..256).map(|i| i as f64).collect()).unwrap();
    let path = dir.path().join("radar.csv");
    save_series(&s, &path).unwrap();
    let r = load_time_series(&path).unwrap();
    assert!((r.dt - 0.133).abs() / 0.133 < 1e-15, "dt={}", r.dt);
    assert_eq!(r.samples, s.samples);
}

#[test]
fn spectral_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = SpectralSeries::from_fn(0.5, 12.0, 23, |s| (-s).exp() / (2.0 * s)).unwrap();
    let path = dir.path().join("g.csv");
    save_series(&g, &path).unwrap();
    let r = load_spectral(&path).unwrap();
    assert_eq!(r.n, 23);
    assert_eq!(r.values, g.values);
    assert!((r.h() - 0.5).abs() < 1e-15);
}

#[test]
fn spectral_series_invariants() {
    assert!(SpectralSeries::new(0.0, 12.0, 4, vec![0.0; 5]).is_err());
    assert!(SpectralSeries::new(2.0, 1.0, 4, vec![0.0; 5]).is_err());
    assert!(SpectralSeries::new(0.5, 12.0, 4, vec![0.0; 4]).is_err());
}

#[test]
fn config_defaults() {
    let c = Config::default();
    assert_eq!(c.x0, -1.0);
    assert_eq!((c.s_min, c.s_max, c.s_step), (0.5, 12.0, 0.5));
    assert_eq!(c.alpha, 0.04);
    assert_eq!(c.inner_iterations, 10);
    assert_eq!(c.laplace_t, 4.0);
    assert_eq!(c.cf, 1e-7);
    assert_eq!((c.increment_tol, c.gradient_cap), (1e-5, 1e5));
    assert_eq!(c.layers(), 23);
    assert_eq!((c.bounds.d0, c.bounds.d1), (0.1, 30.0));
    c.validate().unwrap();
}

#[test]
fn config_file_overrides_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "c.json", r#"{"alpha": 0.01, "agcm": {"scheme": "basic"}}"#);
    let c = Config::load(&p).unwrap();
    assert_eq!(c.alpha, 0.01);
    assert_eq!(c.s_max, 12.0);
    let bad = write(&dir, "b.json", r#"{"alpha": 1.5}"#);
    assert!(Config::load(&bad).is_err());
    let bad = write(&dir, "s.json", r#"{"s_step": 0.7}"#);
    assert!(Config::load(&bad).is_err());
    let typo = write(&dir, "t.json", r#"{"agcm": {"shceme": "basic"}}"#);
    assert!(Config::load(&typo).unwrap_err().to_string().contains("shceme"));
}

#[test]
fn core_types_are_send_and_sync() {
    fn check<T: Send + Sync>() {}
    check::<MediumProfile>();
    check::<TimeSeries>();
    check::<SpectralSeries>();
    check::<Config>();
}
