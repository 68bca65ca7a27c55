mod common;

use proptest::prelude::*;

use indi_hinf::linsys::StateSpaceSystem;
use indi_hinf::synthesis::*;
use indi_hinf::vehicle::QuadcopterParams;

use common::{sim_designs, KINDS};

fn recomputed_norms(plant: &GeneralizedPlant, k: &StateSpaceSystem) -> Vec<(Channel, f64)> {
    let closed = plant.close(k).unwrap();
    assert!(closed.is_stable());
    Channel::ALL
        .iter()
        .map(|&ch| (ch, GeneralizedPlant::channel(&closed, ch).unwrap().hinf_norm(1e-9).unwrap()))
        .collect()
}

#[test]
fn channel_norms_stay_below_gamma() {
    let d = sim_designs();
    for l in [LoopKind::Attitude, LoopKind::Guidance] {
        let plant = d.profile.plant(l, &d.params).unwrap();
        for r in &d.reports(l)[1..] {
            let gamma = r.gamma.unwrap();
            for (ch, n) in recomputed_norms(&plant, &r.controller.k) {
                assert!(n <= gamma * 1.01, "{l:?} {}: {} {n} > gamma {gamma}", r.method, ch.label());
            }
        }
    }
}

#[test]
fn controller_orders() {
    let d = sim_designs();
    for l in [LoopKind::Attitude, LoopKind::Guidance] {
        let r = d.reports(l);
        assert_eq!(r[0].controller.k.order(), 0);
        assert_eq!(r[1].controller.k.order(), 2);
        assert_eq!(r[2].controller.k.order(), 4);
        let set = r[1].controller.cascade.as_ref().unwrap();
        assert_eq!((set.k_outer.order(), set.k_inner.order()), (1, 1));
    }
}

#[test]
fn structured_joint_gamma_not_below_full_order() {
    let sim = QuadcopterParams::preset("bebop-sim").unwrap();
    let exp = QuadcopterParams::preset("enac-exp").unwrap();
    let cases = [
        (DesignProfile::preset("sim").unwrap(), LoopKind::Attitude, &sim),
        (DesignProfile::preset("sim").unwrap(), LoopKind::Guidance, &sim),
        (DesignProfile::preset("exp").unwrap(), LoopKind::Attitude, &exp),
    ];
    for (profile, l, params) in cases {
        let plant = profile.plant(l, params).unwrap();
        let full = synth_full_order(&plant, &FullOrderOptions::default()).unwrap();
        let opts = StructuredOptions {
            objective: Objective::Joint,
            starts: 6,
            warm_start: Some(profile.pd_gains(l, params).unwrap()),
            ..Default::default()
        };
        let s = synth_structured(&plant, Structure::new(1, 1).unwrap(), &opts).unwrap();
        assert!(s.gamma >= full.gamma_opt * (1.0 - 1e-3), "{} {l:?}: {} < {}", profile.name, s.gamma, full.gamma_opt);
    }
}

#[test]
fn full_order_closed_loop_norm_meets_gamma() {
    let d = sim_designs();
    for l in [LoopKind::Attitude, LoopKind::Guidance] {
        let plant = d.profile.plant(l, &d.params).unwrap();
        let r = &d.reports(l)[2];
        let joint = plant.close(&r.controller.k).unwrap();
        let exo = joint.select(&(0..plant.n_exo_out).collect::<Vec<_>>(), &(0..plant.n_exo_in).collect::<Vec<_>>()).unwrap();
        let n = exo.hinf_norm(1e-9).unwrap();
        assert!(n <= r.gamma.unwrap() * 1.001, "{l:?}: {n} vs {:?}", r.gamma);
        assert!(r.gamma_opt.unwrap() <= r.gamma.unwrap());
    }
}

#[test]
fn pd_reports_carry_no_gamma() {
    let d = sim_designs();
    for l in [LoopKind::Attitude, LoopKind::Guidance] {
        let r = &d.reports(l)[0];
        assert_eq!(r.controller.kind, KINDS[0]);
        assert!(r.gamma.is_none());
        assert_eq!(r.channel_norms.len(), Channel::ALL.len());
    }
}

#[test]
fn structured_design_is_seed_deterministic() {
    let d = sim_designs();
    let again = d.profile.design(LoopKind::Attitude, ControllerKind::HinfStructured, &d.params, None, 0).unwrap();
    assert_eq!(again.to_toml().unwrap(), d.attitude[1].to_toml().unwrap());
}

fn static_exp_design(wu_template: f64) -> StructuredDesign {
    let w = WeightSet::new(WeightParams {
        ms: 2.0,
        wb: 2.0 * std::f64::consts::PI,
        eps_e: 1e-4,
        md: 10.0,
        wd_follows_we: false,
        wu_template,
        wn: 0.1,
    })
    .unwrap();
    let act = StateSpaceSystem::first_order_lag(1.0 / 25.65).unwrap();
    let plant = build_generalized_plant(&rigid_axis(), None, &act, &w).unwrap();
    let opts = StructuredOptions {
        warm_start: Some((5.0, 13.0)),
        channels: vec![Channel::RefToError, Channel::RefToControl],
        ..Default::default()
    };
    synth_structured(&plant, Structure::new(0, 0).unwrap(), &opts).unwrap()
}

#[test]
fn static_gains_on_experimental_plant() {
    let d = static_exp_design(100.0);
    let (kmu, kom) = (d.set.k_outer.d()[(0, 0)], d.set.k_inner.d()[(0, 0)]);
    assert!((kmu / 5.2 - 1.0).abs() < 0.05 && (kom / 13.3 - 1.0).abs() < 0.05, "{kmu} {kom}");

    let d = static_exp_design(400.0);
    assert!(d.gamma < 1.0, "{}", d.gamma);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tracking_weight_endpoints(ms in 1.05f64..10.0, wb in 0.01f64..100.0, eps in 1e-6f64..0.5) {
        let we = make_tracking_weight(ms, wb, eps).unwrap();
        let dc = we.dc_gain().unwrap()[(0, 0)];
        prop_assert!((dc.abs() * eps - 1.0).abs() < 1e-9);
        // |We(jω)| tends to |D| as ω → ∞.
        prop_assert!((we.d()[(0, 0)].abs() * ms - 1.0).abs() < 1e-9);
    }

    #[test]
    fn modal_pd_places_requested_pair(tau in 0.005f64..0.05, zeta in 0.3f64..0.95, wn in 2.0f64..20.0) {
        let act = StateSpaceSystem::first_order_lag(tau).unwrap();
        prop_assume!(design_pd_modal(&act, zeta, wn).is_ok());
        let m = design_pd_modal(&act, zeta, wn).unwrap();
        // τs³ + s² + K_Ω s + K_Ω K_μ
        let s = num_complex::Complex64::new(-zeta * wn, wn * (1.0 - zeta * zeta).sqrt());
        let p = tau * s * s * s + s * s + m.k_omega * s + m.k_omega * m.k_mu;
        let scale = tau * wn.powi(3) + wn * wn + m.k_omega * wn + m.k_omega * m.k_mu;
        prop_assert!(p.norm() / scale < 1e-6, "residual {}", p.norm() / scale);
    }
}
