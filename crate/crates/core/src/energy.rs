//! Energy of shadower paths and the straight-line comparison.

use std::f64::consts::PI;

use nalgebra::{Matrix3x2, Vector2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{collinearity_deviation, Vec3, COLLINEARITY_TOLERANCE, RATIO_SLACK};
use crate::kpath::{k_const_velocity, reconstruct_shadower, uniform_times, EndCondition, Engagement, KPath};
use crate::targets::{ConstantVelocity, TargetModel};
use crate::trajectory::{check_uniform, Reference, Trajectory, TrajectorySample};

/// `½∫‖ṙ_D‖² dt` for a unit-mass shadower, by composite Simpson (with a
/// three-eighths panel when the interval count is odd).
pub fn energy_of(traj: &Trajectory) -> Result<f64> {
    let times = traj.times();
    if times.len() < 2 {
        return Err(Error::InvalidInput("energy needs at least two samples".into()));
    }
    check_uniform(&times)?;
    let f: Vec<f64> = traj.samples.iter().map(|s| 0.5 * s.vd.norm_squared()).collect();
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    Ok(simpson(&f, h))
}

pub(crate) fn simpson(f: &[f64], h: f64) -> f64 {
    let intervals = f.len() - 1;
    match intervals {
        1 => 0.5 * h * (f[0] + f[1]),
        3 => 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]),
        _ => {
            let even = if intervals % 2 == 0 { intervals } else { intervals - 3 };
            let mut sum = f[0] + f[even];
            for (i, v) in f.iter().enumerate().take(even).skip(1) {
                sum += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
            }
            let mut total = sum * h / 3.0;
            if even < intervals {
                let g = &f[even..];
                total += 3.0 * h / 8.0 * (g[0] + 3.0 * g[1] + 3.0 * g[2] + g[3]);
            }
            total
        }
    }
}

/// Static point and ratio state recovered from Cartesian initial conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferredEngagement {
    pub p: Vec3,
    pub k0: f64,
    pub k0_dot: f64,
}

/// Solves `v_D = k₀ v_T − β (x_D − x_T)` for `k₀` and `β = k̇₀ / (1 − k₀)`,
/// then places the static point at `x_T + (x_D − x_T) / (1 − k₀)`.
pub fn infer_engagement(xt0: Vec3, vt0: Vec3, xd0: Vec3, vd0: Vec3) -> Result<InferredEngagement> {
    let d = xd0 - xt0;
    if d.norm() == 0.0 {
        return Err(Error::Degenerate("shadower and target start at the same point".into()));
    }
    let a = Matrix3x2::from_columns(&[vt0, -d]);
    let scale = vt0.norm().max(d.norm());
    let svd = a.svd(true, true);
    let smallest = svd.singular_values.min();
    if smallest <= 1e-12 * scale {
        return Err(Error::Degenerate(
            "target velocity is parallel to the shadower–target offset; k₀ and k̇₀ are not determined".into(),
        ));
    }
    let sol: Vector2<f64> = svd
        .solve(&vd0, 0.0)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let (k0, beta) = (sol[0], sol[1]);
    let residual = (a * sol - vd0).norm();
    if residual > 1e-9 * vd0.norm().max(vt0.norm()).max(1.0) {
        return Err(Error::InvalidInput(format!(
            "initial velocities are not consistent with camouflage (residual {residual:.3e})"
        )));
    }
    if !(k0 < 1.0) {
        return Err(Error::RatioOutOfDomain { k: k0, t: 0.0 });
    }
    Ok(InferredEngagement {
        p: xt0 + d / (1.0 - k0),
        k0,
        k0_dot: beta * (1.0 - k0),
    })
}

/// Shadower flying the fixed segment `d0 → x_int` while staying on the
/// constraint line through `p` and the target, sampled every `dt` up to `t_int`.
pub fn straight_line_baseline(
    p: Vec3,
    target: &ConstantVelocity,
    d0: Vec3,
    t_int: f64,
    x_int: Vec3,
    dt: f64,
) -> Result<Trajectory> {
    let w = x_int - d0;
    let len = w.norm();
    if len == 0.0 {
        return Err(Error::Degenerate("baseline segment has zero length".into()));
    }
    let mut samples = Vec::new();
    for t in uniform_times(0.0, t_int, dt) {
        let rt = target.position(t);
        let u = rt - p;
        let wu = w.cross(&u);
        let wu2 = wu.norm_squared();
        if wu2 <= (1e-12 * len * u.norm()).powi(2) {
            return Err(Error::Degenerate(format!(
                "constraint line at t = {t} is parallel to the baseline segment"
            )));
        }
        let s = -(d0 - p).cross(&u).dot(&wu) / wu2;
        if !(-1e-9..=1.0 + 1e-9).contains(&s) {
            return Err(Error::Degenerate(format!(
                "constraint line at t = {t} misses the baseline segment (s = {s})"
            )));
        }
        let rd = d0 + s * w;
        if collinearity_deviation(&p, &rt, &rd)? > COLLINEARITY_TOLERANCE * u.norm() {
            return Err(Error::Degenerate(format!(
                "constraint line at t = {t} does not meet the baseline segment"
            )));
        }
        let s_dot = -(rd - p).cross(&target.v).dot(&wu) / wu2;
        let s_ddot = -2.0 * s_dot * w.cross(&target.v).dot(&wu) / wu2;
        let vd = s_dot * w;
        let alpha = p - rt;
        let aa = alpha.norm_squared();
        let k = (p - rd).dot(&alpha) / aa;
        samples.push(TrajectorySample {
            t,
            rd,
            vd,
            ad: s_ddot * w,
            rt,
            vt: target.v,
            k,
            k_dot: -(vd - k * target.v).dot(&alpha) / aa,
        });
    }
    Trajectory::new(Reference::StaticPoint(p), samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub j_optimal: f64,
    pub j_baseline: f64,
    pub final_speed_optimal: f64,
    pub final_speed_baseline: f64,
    pub ratio: f64,
    pub interception_time: f64,
    pub interception_point: [f64; 3],
}

/// Optimal and straight-line paths for one engagement.
#[derive(Debug, Clone)]
pub struct EnergyComparison {
    pub report: EnergyReport,
    pub optimal: Trajectory,
    pub baseline: Trajectory,
}

/// Compares the energy-optimal open-ended path with the straight camouflaged
/// path to the same interception point. The interception time is the optimal
/// path's capture time unless `interception` overrides it.
pub fn energy_compare(
    p: Vec3,
    target: &ConstantVelocity,
    k0: f64,
    k0_dot: f64,
    dt: f64,
    interception: Option<f64>,
) -> Result<EnergyComparison> {
    let path = k_const_velocity(p, target, k0, k0_dot)?;
    let t_int = match interception {
        Some(t) => t,
        None => path.capture_time().ok_or_else(|| {
            Error::NoCapture(format!(
                "k(t) never reaches 1 (k₀ = {k0}, k̇₀ = {k0_dot}); no interception point for the baseline"
            ))
        })?,
    };
    if !(t_int > 0.0) {
        return Err(Error::InvalidInput(format!("interception time {t_int} must be positive")));
    }
    let engagement = Engagement::static_point(
        p,
        TargetModel::constant_velocity(target.r0, target.v),
        k0,
        k0_dot,
        t_int,
        EndCondition::Open,
    )?;
    let optimal = reconstruct_shadower(&engagement, &path, &uniform_times(0.0, t_int, dt))?;
    let x_int = optimal.last().rd;
    let baseline = straight_line_baseline(p, target, optimal.first().rd, t_int, x_int, dt)?;
    let j_optimal = energy_of(&optimal)?;
    let j_baseline = energy_of(&baseline)?;
    let report = EnergyReport {
        j_optimal,
        j_baseline,
        final_speed_optimal: optimal.last().vd.norm(),
        final_speed_baseline: baseline.last().vd.norm(),
        ratio: j_baseline / j_optimal,
        interception_time: t_int,
        interception_point: [x_int.x, x_int.y, x_int.z],
    };
    Ok(EnergyComparison {
        report,
        optimal,
        baseline,
    })
}

/// `ΔJ` for `k(t) + ε sin(π (t − t₀)/(t_f − t₀))` over the path's domain, for each
/// amplitude. `None` marks an amplitude whose perturbed `k` leaves `k ≤ 1`.
pub fn perturbation_test(
    kpath: &KPath,
    engagement: &Engagement,
    amplitudes: &[f64],
    dt: f64,
) -> Result<Vec<(f64, Option<f64>)>> {
    let domain = kpath.domain();
    let (t0, tf) = (domain.start, domain.end.min(engagement.tf));
    if !tf.is_finite() || !(tf > t0) {
        return Err(Error::InvalidInput("perturbation needs a finite interval".into()));
    }
    let times = uniform_times(t0, tf, dt);
    let base: Vec<_> = times.iter().map(|&t| kpath.eval(t)).collect::<Result<_>>()?;
    let j0 = energy_of(&reconstruct_shadower(engagement, kpath, &times)?)?;
    let w = PI / (tf - t0);
    let mut out = Vec::with_capacity(amplitudes.len());
    for &eps in amplitudes {
        let eta = |t: f64| (w * (t - t0)).sin();
        let k: Vec<f64> = times.iter().zip(&base).map(|(&t, s)| s.k + eps * eta(t)).collect();
        if k.iter().any(|&v| v > 1.0 + RATIO_SLACK) {
            out.push((eps, None));
            continue;
        }
        let kd = times
            .iter()
            .zip(&base)
            .map(|(&t, s)| s.k_dot + eps * w * (w * (t - t0)).cos())
            .collect();
        let kdd = times
            .iter()
            .zip(&base)
            .map(|(&t, s)| s.k_ddot - eps * w * w * eta(t))
            .collect();
        let bumped = KPath::sampled(times.clone(), k, kd, Some(kdd))?;
        let j = energy_of(&reconstruct_shadower(engagement, &bumped, &times)?)?;
        out.push((eps, Some(j - j0)));
    }
    Ok(out)
}
