mod common;

use motion_camouflage::elode::{orthogonality_residual, solve_el_ode, OdeConfig};
use motion_camouflage::energy::{energy_of, infer_engagement};
use motion_camouflage::geometry::to_spherical;
use motion_camouflage::guidance::{simulate_mcpn, GuidanceConfig, Integrator};
use motion_camouflage::kpath::{
    k_const_velocity, k_finite_horizon, k_infinity, k_tpn_engagement, reconstruct_shadower, uniform_times,
    EndCondition, Engagement, InfinityMode, KPathKind,
};
use motion_camouflage::targets::{ConstantVelocity, TargetModel, TpnTarget};
use motion_camouflage::Vec3;
use proptest::prelude::*;

fn vec3(lo: f64, hi: f64) -> impl Strategy<Value = Vec3> {
    (lo..hi, lo..hi, lo..hi).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

/// Target whose closest approach to `p` stays well away from it.
fn engagement() -> impl Strategy<Value = (Vec3, ConstantVelocity)> {
    (vec3(-500.0, 500.0), vec3(-200.0, 200.0), vec3(-100.0, 100.0))
        .prop_map(|(p, offset, v)| {
            let dir = if offset.norm() < 1.0 { Vec3::x() } else { offset.normalize() };
            (p, ConstantVelocity::new(p + 300.0 * dir + offset, v))
        })
        .prop_filter("line passes near P", |(p, cv)| {
            let a = p - cv.r0;
            cv.v.norm() < 1e-9 || a.cross(&cv.v).norm() / cv.v.norm() > 50.0
        })
}

fn model(cv: &ConstantVelocity) -> TargetModel {
    TargetModel::constant_velocity(cv.r0, cv.v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn capture_path_is_monotone_and_lands_on_one(
        (p, cv) in engagement(), k0 in -0.5f64..0.9, tf in 1.0f64..15.0,
    ) {
        let path = k_finite_horizon(p, &cv, k0, tf).unwrap();
        let times = uniform_times(0.0, tf, tf / 400.0);
        let ks: Vec<f64> = times.iter().map(|&t| path.k(t).unwrap()).collect();
        prop_assert!((ks[ks.len() - 1] - 1.0).abs() < 1e-12);
        prop_assert!(ks.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn optimal_paths_are_camouflaged_and_orthogonal(
        (p, cv) in engagement(), k0 in -0.5f64..0.9, tf in 2.0f64..10.0,
    ) {
        let path = k_finite_horizon(p, &cv, k0, tf).unwrap();
        let eng = Engagement::static_point(p, model(&cv), k0, path.k_dot(0.0).unwrap(), tf, EndCondition::Capture).unwrap();
        // stop short of capture, where the line of sight is undefined
        let traj = reconstruct_shadower(&eng, &path, &uniform_times(0.0, 0.95 * tf, 1e-3)).unwrap();
        prop_assert!(traj.max_collinearity_deviation().unwrap() <= 1e-8);
        let res = orthogonality_residual(&traj).unwrap();
        prop_assert!(res.max_orthogonality_cos <= 1e-5, "cos {}", res.max_orthogonality_cos);
    }

    #[test]
    fn ode_reproduces_closed_form(
        (p, cv) in engagement(), k0 in -0.5f64..0.5, k0_dot in -0.05f64..0.05,
    ) {
        let closed = k_const_velocity(p, &cv, k0, k0_dot).unwrap();
        let num = solve_el_ode(p, &model(&cv), k0, k0_dot, OdeConfig::new(4.0).with_step(1e-2)).unwrap();
        let KPathKind::Sampled(s) = &num.kind else { panic!() };
        for (&t, &k) in s.times().iter().zip(s.values()) {
            prop_assert!((k - closed.k(t).unwrap()).abs() < 1e-8, "t {t}");
        }
    }

    #[test]
    fn energy_is_additive(
        (p, cv) in engagement(), k0 in -0.5f64..0.9, split in 1usize..49,
    ) {
        let path = k_finite_horizon(p, &cv, k0, 5.0).unwrap();
        let eng = Engagement::static_point(p, model(&cv), k0, path.k_dot(0.0).unwrap(), 5.0, EndCondition::Capture).unwrap();
        let traj = reconstruct_shadower(&eng, &path, &uniform_times(0.0, 5.0, 5.0 / 100.0)).unwrap();
        let mid = 2 * split;
        let whole = energy_of(&traj).unwrap();
        let parts = energy_of(&traj.slice(0, mid).unwrap()).unwrap() + energy_of(&traj.slice(mid, 100).unwrap()).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * whole);
        prop_assert!(whole >= 0.0);
    }

    #[test]
    fn inference_round_trips(
        (p, cv) in engagement(), k0 in -0.5f64..0.9, k0_dot in -0.3f64..0.3,
    ) {
        let alpha0 = p - cv.r0;
        let xd = p - k0 * alpha0;
        let vd = k0 * cv.v - k0_dot * alpha0;
        prop_assume!(alpha0.cross(&(vd - cv.v)).norm() > 1e-3 * alpha0.norm() * (vd - cv.v).norm().max(1.0));
        let inf = infer_engagement(cv.r0, cv.v, xd, vd).unwrap();
        prop_assert!((inf.p - p).norm() <= 1e-6 * p.norm().max(1.0));
        prop_assert!((inf.k0 - k0).abs() <= 1e-8);
        prop_assert!((inf.k0_dot - k0_dot).abs() <= 1e-8);
    }

    #[test]
    fn tracking_at_infinity_holds_separation(
        start in vec3(-100.0, 100.0), offset in vec3(10.0, 300.0), v in vec3(-100.0, 100.0),
    ) {
        let cv = ConstantVelocity::new(start + offset, v);
        let path = k_infinity(offset, &cv, InfinityMode::Track).unwrap();
        let eng = Engagement::infinity(start, model(&cv), 0.0, 10.0, EndCondition::Track).unwrap();
        let traj = reconstruct_shadower(&eng, &path, &uniform_times(0.0, 10.0, 0.05)).unwrap();
        for s in &traj.samples {
            prop_assert!(((s.rt - s.rd).norm() - offset.norm()).abs() <= 1e-9 * offset.norm());
            prop_assert!((s.vd - s.vt).norm() <= 1e-9 * v.norm().max(1.0));
        }
    }
}

#[test]
fn guidance_converges_at_first_order() {
    let cfg = common::load("fig8_mcpn");
    let eng = motion_camouflage::scenario::build_engagement(&cfg).unwrap();
    let closed = k_const_velocity(cfg.static_point.unwrap(), eng.target.as_constant_velocity().unwrap(), eng.k0, eng.k0_dot)
        .unwrap();
    let err = |dt: f64| {
        let run = simulate_mcpn(&eng, GuidanceConfig { dt, integrator: Integrator::SemiImplicitEuler }).unwrap();
        run.trajectory
            .samples
            .iter()
            .filter(|s| s.t <= 4.0)
            .map(|s| (s.k - closed.k(s.t).unwrap()).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(4e-4), err(2e-4));
    let ratio = coarse / fine;
    assert!((1.6..=2.5).contains(&ratio), "{coarse:e} / {fine:e} = {ratio}");
}

#[test]
fn tpn_target_follows_polar_closed_form() {
    let cfg = common::load("fig9_tpn");
    let eng = motion_camouflage::scenario::build_engagement(&cfg).unwrap();
    let p = cfg.static_point.unwrap();
    let TargetModel::Reactive(TpnTarget { r0, v0, lambda }) = eng.target else { panic!() };
    let run = simulate_mcpn(&eng, GuidanceConfig { dt: 1e-4, integrator: Integrator::Rk4 }).unwrap();
    let end = run.capture_time.unwrap();
    let polar0 = to_spherical(&p, &r0, &v0).unwrap();
    let path = k_tpn_engagement(p, polar0, lambda, eng.k0, eng.k0_dot * polar0.r * polar0.r, end, 1e-3).unwrap();
    let KPathKind::TpnClosedForm(tpn) = &path.kind else { panic!() };
    let scale = (r0 - p).norm();
    let mut worst: f64 = 0.0;
    for s in run.trajectory.samples.iter().filter(|s| s.t <= 0.9 * end).step_by(100) {
        let model = tpn.target_state(s.t);
        worst = worst.max((model.position - s.rt).norm() / scale);
        let k = path.k(s.t).unwrap();
        assert!((k - s.k).abs() < 1e-4, "t {} k {} vs {}", s.t, k, s.k);
    }
    assert!(worst < 1e-5, "{worst:e}");
    // finite-difference velocity of the closed form matches its stated velocity
    let h = 1e-4;
    for t in [0.5, 2.0, 0.8 * end] {
        let fd = (tpn.target_state(t + h).position - tpn.target_state(t - h).position) / (2.0 * h);
        let v = tpn.target_state(t).velocity;
        assert!((fd - v).norm() <= 1e-5 * v.norm(), "t {t}");
    }
}
