use cip1d::preprocess::*;
use cip1d::TimeSeries;

fn dips(a: f64, b: f64) -> TimeSeries {
    // Gaussian dips at t=5 and t=9 on a 0.1 ns grid.
    let samples = (0..150)
        .map(|i| {
            let t = i as f64 * 0.1;
            a * (-(t - 5.0).powi(2) / 0.2).exp() + b * (-(t - 9.0).powi(2) / 0.2).exp()
        })
        .collect();
    TimeSeries::new(0.0, 0.1, samples).unwrap()
}

/// Brute-force scan for the largest candidate extremum, earliest on ties.
fn oracle(v: &[f64], negative_only: bool) -> usize {
    let mut best: Option<usize> = None;
    for i in 1..v.len() - 1 {
        let ext = (v[i] < v[i - 1] && v[i] < v[i + 1]) || (v[i] > v[i - 1] && v[i] > v[i + 1]);
        if !ext || (negative_only && v[i] >= 0.0) {
            continue;
        }
        match best {
            Some(b) if v[b].abs() >= v[i].abs() => {}
            _ => best = Some(i),
        }
    }
    best.unwrap()
}

#[test]
fn zero_noise_is_identity() {
    let s = dips(-3.0, -7.0);
    assert_eq!(add_noise(&s, 0.0, 9).unwrap(), s);
}

#[test]
fn noise_stays_within_level() {
    let s = dips(-3.0, -7.0);
    let n = add_noise(&s, 0.05, 3).unwrap();
    for (a, b) in s.samples.iter().zip(&n.samples) {
        if *a == 0.0 {
            assert_eq!(*b, 0.0);
        } else {
            assert!(((b - a) / a).abs() < 0.05);
        }
    }
}

#[test]
fn noise_is_reproducible_per_seed() {
    let s = dips(-3.0, -7.0);
    assert_eq!(add_noise(&s, 0.1, 11).unwrap(), add_noise(&s, 0.1, 11).unwrap());
    assert_ne!(add_noise(&s, 0.1, 11).unwrap(), add_noise(&s, 0.1, 12).unwrap());
}

#[test]
fn noise_level_must_be_below_one() {
    let s = dips(-3.0, -7.0);
    assert!(add_noise(&s, 1.0, 1).is_err());
    assert!(add_noise(&s, -0.1, 1).is_err());
}

#[test]
fn air_target_keeps_deepest_dip() {
    let s = dips(-3.0, -7.0);
    let (out, sel) = select_peak(&s, TargetPlacement::Air, 0.05, 1.0).unwrap();
    assert_eq!(sel.extremum_index, oracle(&s.samples, true));
    assert!((s.t(sel.extremum_index) - 9.0).abs() < 1e-9);
    assert!((sel.new_origin - (sel.onset_time - 1.0)).abs() < 1e-12);
    assert!(sel.i_start <= sel.extremum_index && sel.extremum_index <= sel.i_end);
    // Onset sits exactly one time unit after the new origin.
    let k = sel.i_start - (s.len() - out.len());
    assert!((out.t(k) - 1.0).abs() < 1e-9);
    assert_eq!(out.samples[k], s.samples[sel.i_start]);
}

#[test]
fn ties_select_the_earliest_peak() {
    let s = dips(-7.0, -7.0);
    let (_, sel) = select_peak(&s, TargetPlacement::Air, 0.05, 1.0).unwrap();
    assert!((s.t(sel.extremum_index) - 5.0).abs() < 1e-9);
    assert_eq!(sel.extremum_index, oracle(&s.samples, true));
}

#[test]
fn buried_target_may_select_positive_peak() {
    let s = dips(-3.0, 8.0);
    let (_, sel) = select_peak(&s, TargetPlacement::Buried, 0.05, 1.0).unwrap();
    assert_eq!(sel.extremum_index, oracle(&s.samples, false));
    assert!(sel.extremum_value > 7.9);
    let (_, air) = select_peak(&s, TargetPlacement::Air, 0.05, 1.0).unwrap();
    assert!(air.extremum_value < 0.0);
}

#[test]
fn positive_only_signal_has_no_air_candidate() {
    let s = dips(3.0, 7.0);
    assert!(select_peak(&s, TargetPlacement::Air, 0.05, 1.0).is_err());
}

#[test]
fn support_is_compact_and_idempotent() {
    let s = dips(-3.0, -7.0);
    let (out, sel) = select_peak(&s, TargetPlacement::Air, 0.05, 1.0).unwrap();
    let shift = s.len() - out.len();
    for (i, &v) in out.samples.iter().enumerate() {
        let j = i + shift;
        if j < sel.i_start || j > sel.i_end {
            assert_eq!(v, 0.0);
        } else {
            assert!(v < 0.0);
        }
    }
    let (again, sel2) = select_peak(&out, TargetPlacement::Air, 0.05, 1.0).unwrap();
    assert_eq!(sel2.i_end - sel2.i_start, sel.i_end - sel.i_start);
    assert_eq!(again.samples.iter().filter(|v| **v != 0.0).count(), sel.i_end - sel.i_start + 1);
}

#[test]
fn calibration_scales_pointwise() {
    let s = dips(-3.0, -7.0);
    assert_eq!(calibrate(&s, 1.0).unwrap(), s);
    let radar = s.map(|_, v| v * 1e4 / 7.0);
    let c = calibrate(&radar, 1e-7).unwrap();
    let m = c.samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
    assert!((m - 1e-3).abs() < 1e-6);
    let ab = calibrate(&calibrate(&s, 3.0).unwrap(), 0.7).unwrap();
    let direct = calibrate(&s, 2.1).unwrap();
    for (x, y) in ab.samples.iter().zip(&direct.samples) {
        assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0));
    }
    assert!(calibrate(&s, 0.0).is_err());
    assert!(calibrate(&s, -1.0).is_err());
}

#[test]
fn glk_normalization_adds_direct_term() {
    let s = TimeSeries::new(0.0, 0.1, vec![0.0, 2.0, 4.0]).unwrap();
    let f = glk_normalize(&s, 0.5).unwrap();
    assert_eq!(f.samples, vec![-1.0, 0.0, 1.0]);
}

#[test]
fn odd_extension_examples() {
    let c = TimeSeries::new(0.0, 0.1, vec![-1.0; 6]).unwrap();
    let e = extend_odd(&c).unwrap();
    assert_eq!(e.at(0), 0.0);
    for k in 1..=5 {
        assert_eq!(e.at(k), -1.0);
        assert_eq!(e.at(-k), 1.0);
    }
    let lin = TimeSeries::new(0.0, 0.1, (0..6).map(|i| i as f64 * 0.1).collect()).unwrap();
    let e = extend_odd(&lin).unwrap();
    for k in -5..=5isize {
        assert!((e.at(k) - k as f64 * 0.1).abs() < 1e-15);
    }
    let s = dips(-3.0, 2.0);
    let e = extend_odd(&s).unwrap();
    for k in 0..s.len() as isize {
        assert_eq!(e.at(k) + e.at(-k), 0.0);
    }
    assert!(extend_odd(&TimeSeries::new(0.5, 0.1, vec![1.0, 2.0]).unwrap()).is_err());
}

#[test]
fn placement_parses() {
    assert_eq!("air".parse::<TargetPlacement>().unwrap(), TargetPlacement::Air);
    assert_eq!("buried".parse::<TargetPlacement>().unwrap(), TargetPlacement::Buried);
    assert!("sky".parse::<TargetPlacement>().is_err());
}
