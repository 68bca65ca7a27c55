mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use indi_hinf::analysis::*;
use indi_hinf::linsys::{feedback, FeedbackSign, FrequencyGrid, StateSpaceSystem};
use indi_hinf::synthesis::{channel_norms, rigid_axis, Channel, LoopKind, WeightSet};
use indi_hinf::vehicle::measurement_filter;

use common::{sim_designs, KINDS};

fn scalar(sys: &StateSpaceSystem, w: f64) -> Complex64 {
    sys.freq_response(w).unwrap()[(0, 0)]
}

#[test]
fn output_disturbance_path_through_inversion_residual() {
    let d = sim_designs();
    let h = measurement_filter(&d.params.filter).unwrap();
    for l in [LoopKind::Attitude, LoopKind::Guidance] {
        let act = d.actuator(l);
        let e = inversion_residual(&act, Some(&h)).unwrap();
        for i in 0..3 {
            let set = d.sensitivities(l, i);
            for p in set.points.iter().step_by(7) {
                let want = p.s_di * scalar(&e, p.omega) / scalar(&act, p.omega);
                assert!((p.s_do - want).norm() <= 1e-8 * (1.0 + want.norm()), "{l:?} {i} at {}", p.omega);
            }
        }
    }
}

#[test]
fn input_sensitivity_matches_loop_transfer() {
    let d = sim_designs();
    let g = rigid_axis();
    for l in [LoopKind::Attitude, LoopKind::Guidance] {
        let act = d.actuator(l);
        for (i, r) in d.reports(l).iter().enumerate() {
            let set = d.sensitivities(l, i);
            let lt = loop_transfer(&g, &r.controller.k, &act).unwrap();
            for p in set.points.iter().step_by(11) {
                let gy = g.freq_response(p.omega).unwrap()[(0, 0)];
                let want = gy * scalar(&act, p.omega) / (1.0 + scalar(&lt, p.omega));
                assert!((p.s_di - want).norm() <= 1e-8 * (1.0 + want.norm()), "{l:?} {i} at {}", p.omega);
            }
        }
    }
}

#[test]
fn weighted_peaks_match_channel_norms() {
    let d = sim_designs();
    let grid = FrequencyGrid::log(1e-6, 1e4, 6000).unwrap();
    for l in [LoopKind::Attitude, LoopKind::Guidance] {
        let plant = d.profile.plant(l, &d.params).unwrap();
        let w = WeightSet::new(d.profile.loop_design(l).weights).unwrap();
        for r in d.reports(l) {
            let set = closed_loop_sensitivities(&rigid_axis(), &r.controller.k, None, &d.actuator(l), &grid).unwrap();
            let c = template_compliance(&set, &w, 1.0).unwrap();
            let norms = channel_norms(&plant, &r.controller.k, &Channel::ALL).unwrap();
            for (cc, (ch, n)) in c.channels.iter().zip(&norms) {
                assert_eq!(cc.channel, *ch);
                assert!(cc.peak <= n * (1.0 + 1e-6) && cc.peak >= n * 0.99, "{l:?} {}: {} vs {n}", ch.label(), cc.peak);
            }
        }
    }
}

#[test]
fn sensitivity_ordering_at_low_frequency() {
    let d = sim_designs();
    for l in [LoopKind::Attitude, LoopKind::Guidance] {
        let v: Vec<f64> = (0..3).map(|i| d.sensitivities(l, i).s_di_at(0.1).unwrap()).collect();
        // KINDS order: pd, structured, full.
        assert!(v[2] < v[1] && v[1] < v[0], "{l:?}: {v:?}");
    }
}

#[test]
fn synthesized_designs_meet_margin_floor() {
    let d = sim_designs();
    for l in [LoopKind::Attitude, LoopKind::Guidance] {
        for (i, r) in d.reports(l).iter().enumerate() {
            if r.gamma.is_some_and(|g| g < 1.0) {
                let m = margins(&d.sensitivities(l, i).s).unwrap();
                assert!(m.meets_floor(), "{l:?} {}: {m:?}", KINDS[i].label());
            }
        }
    }
}

#[test]
fn integrator_loop_has_ninety_degrees() {
    let l = StateSpaceSystem::integrator();
    let s = feedback(&StateSpaceSystem::scalar_gain(1.0), &l, FeedbackSign::Negative).unwrap();
    let m = margins(&s).unwrap();
    assert!((m.phase_deg - 90.0).abs() < 1e-6, "{m:?}");
    assert!(m.gain_db.is_infinite());
    assert!((m.modulus - 1.0).abs() < 1e-6);
    assert!((m.crossover.unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn sensitivity_peak_of_two_gives_modulus_half() {
    // S = (s + 2)/(s + 1) peaks at 2 at DC.
    let s = StateSpaceSystem::from_tf(&[1.0, 2.0], &[1.0, 1.0]).unwrap();
    let m = margins(&s).unwrap();
    assert!((m.modulus - 0.5).abs() < 1e-6, "{m:?}");
}

#[test]
fn sensitivity_csv_layout() {
    let d = sim_designs();
    let grid = FrequencyGrid::log(0.1, 100.0, 25).unwrap();
    let w = WeightSet::new(d.profile.attitude.weights).unwrap();
    let act = d.actuator(LoopKind::Attitude);
    let sets: Vec<_> = d.attitude.iter().map(|r| closed_loop_sensitivities(&rigid_axis(), &r.controller.k, None, &act, &grid).unwrap()).collect();
    let refs: Vec<(&str, &SensitivitySet)> = KINDS.iter().map(|k| k.label()).zip(sets.iter()).collect();
    let mut buf = Vec::new();
    write_sensitivity_csv(&mut buf, &refs, Some(&w.we)).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1 + 3 * 5 + 1);
    assert_eq!(header[1], "pd_S");
    assert_eq!(*header.last().unwrap(), "S_template");
    assert_eq!(lines.count(), 25);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    // Classical bounds: GM ≥ Ms/(Ms − 1), reduction ≥ (Ms + 1)/Ms, PM ≥ 2·asin(1/(2Ms)).
    #[test]
    fn margins_respect_modulus_bounds(k in 0.2f64..20.0, tau in 0.01f64..1.0, z in 0.05f64..5.0) {
        // L = k(s + z)/(s²(τs + 1)), stable closed loop when z < 1/τ.
        prop_assume!(z * tau < 0.9);
        let l = StateSpaceSystem::from_tf(&[k, k * z], &[tau, 1.0, 0.0, 0.0]).unwrap();
        let s = feedback(&StateSpaceSystem::scalar_gain(1.0), &l, FeedbackSign::Negative).unwrap();
        prop_assume!(s.is_stable());
        let m = margins(&s).unwrap();
        let ms = 1.0 / m.modulus;
        let gm_bound = 20.0 * (ms / (ms - 1.0)).log10();
        let pm_bound = 2.0 * (1.0 / (2.0 * ms)).asin().to_degrees();
        prop_assert!(m.gain_db >= gm_bound - 1e-6, "{m:?}");
        prop_assert!(m.gain_reduction_db >= 20.0 * ((ms + 1.0) / ms).log10() - 1e-6, "{m:?}");
        prop_assert!(m.phase_deg >= pm_bound - 1e-6, "{m:?}");
    }
}
