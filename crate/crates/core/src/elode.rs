//! Numerical solution of the Euler–Lagrange equation for `k(t)` against an
//! arbitrary twice-differentiable target track:
//!
//! `k̈ (α·α) + 2 k̇ (α̇·α) + k (α̈·α) = 0`, `α = P − r_T`.

use std::cell::Cell;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::kpath::{KPath, SINGULARITY_FRACTION};
use crate::ode::{rk4_step, step_count};
use crate::targets::TargetModel;
use crate::trajectory::Trajectory;

/// Default integration step, s.
pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OdeMethod {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeConfig {
    pub dt: f64,
    pub method: OdeMethod,
    pub tf: f64,
}

impl OdeConfig {
    pub fn new(tf: f64) -> Self {
        Self {
            dt: DEFAULT_STEP,
            method: OdeMethod::Rk4,
            tf,
        }
    }

    pub fn with_step(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }
}

/// Orthogonality diagnostics along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// Largest `|â_D · r̂_LOS|` over interior samples.
    pub max_orthogonality_cos: f64,
    /// Largest collinearity deviation, relative to range (static point) or in
    /// radians (infinity).
    pub max_collinearity_dev: f64,
    /// `|â_D · r̂_LOS|` per sample; `None` at the ends and where the
    /// acceleration vanishes.
    pub per_sample: Vec<Option<f64>>,
}

/// `k̈` from the Euler–Lagrange equation at time `t`.
fn k_ddot(p: &Vec3, target: &TargetModel, t: f64, k: f64, k_dot: f64, floor: f64) -> Result<f64> {
    let s = target.eval(t)?;
    let alpha = p - s.position;
    let aa = alpha.norm_squared();
    if aa.sqrt() <= floor {
        return Err(Error::Singularity {
            t,
            what: "target at the static point".into(),
        });
    }
    // α̇ = −ṙ_T, α̈ = −r̈_T
    Ok((2.0 * k_dot * s.velocity.dot(&alpha) + k * s.acceleration.dot(&alpha)) / aa)
}

/// Integrates from `(t0, k0, k̇0)` to `t1` (either direction) with fixed RK4
/// steps of at most `dt`. Forward runs stop at the step where `k` first
/// reaches 1; that step is shortened so the history ends on `k = 1`.
pub fn integrate(
    p: Vec3,
    target: &TargetModel,
    t0: f64,
    k0: f64,
    k0_dot: f64,
    t1: f64,
    dt: f64,
) -> Result<KPath> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("step dt = {dt} must be positive")));
    }
    if t1 == t0 || !t1.is_finite() {
        return Err(Error::InvalidInput("integration interval is empty or unbounded".into()));
    }
    let alpha0 = (p - target.eval(t0)?.position).norm();
    if alpha0 == 0.0 {
        return Err(Error::Singularity {
            t: t0,
            what: "target starts at the static point".into(),
        });
    }
    let floor = SINGULARITY_FRACTION * alpha0;
    let forward = t1 > t0;

    let failure: Cell<Option<Error>> = Cell::new(None);
    let mut rhs = |t: f64, y: &[f64; 2]| -> [f64; 2] {
        match k_ddot(&p, target, t, y[0], y[1], floor) {
            Ok(acc) => [y[1], acc],
            Err(e) => {
                let first = failure.take().unwrap_or(e);
                failure.set(Some(first));
                [f64::NAN, f64::NAN]
            }
        }
    };

    let steps = step_count((t1 - t0).abs(), dt);
    let h = (t1 - t0) / steps as f64;
    let mut times = vec![t0];
    let mut y = [k0, k0_dot];
    let mut ks = vec![k0];
    let mut kds = vec![k0_dot];
    let mut kdds = vec![rhs(t0, &y)[1]];
    for i in 0..steps {
        if forward && y[0] >= 1.0 {
            break;
        }
        let t = t0 + i as f64 * h;
        let t_next = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * h };
        let mut next = rk4_step(&mut rhs, t, &y, t_next - t);
        let mut t_end = t_next;
        if forward && next[0] > 1.0 {
            // shorten the step onto k = 1 by bisection on its length
            let (mut lo, mut hi) = (0.0, t_next - t);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let trial = rk4_step(&mut rhs, t, &y, mid);
                if trial[0] > 1.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if lo == 0.0 {
                break;
            }
            next = rk4_step(&mut rhs, t, &y, lo);
            t_end = t + lo;
        }
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let acc = rhs(t_end, &next)[1];
        if let Some(e) = failure.take() {
            return Err(e);
        }
        y = next;
        times.push(t_end);
        ks.push(y[0]);
        kds.push(y[1]);
        kdds.push(acc);
        if t_end != t_next {
            break;
        }
    }
    if !forward {
        times.reverse();
        ks.reverse();
        kds.reverse();
        kdds.reverse();
    }
    KPath::sampled(times, ks, kds, Some(kdds))
}

/// Solves for `k(t)` on `[0, tf]` from `k(0) = k0`, `k̇(0) = k0_dot`,
/// stopping early if `k` reaches 1.
pub fn solve_el_ode(p: Vec3, target: &TargetModel, k0: f64, k0_dot: f64, cfg: OdeConfig) -> Result<KPath> {
    if !(cfg.tf > 0.0) {
        return Err(Error::InvalidInput(format!("horizon tf = {} must be positive", cfg.tf)));
    }
    match cfg.method {
        OdeMethod::Rk4 => integrate(p, target, 0.0, k0, k0_dot, cfg.tf, cfg.dt),
    }
}

/// How far the shadower's acceleration is from orthogonal to the line of
/// sight, sample by sample.
///
/// Acceleration is the central difference of the sampled velocities; samples
/// whose acceleration is at round-off level are skipped.
pub fn orthogonality_residual(traj: &Trajectory) -> Result<ResidualReport> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "orthogonality residual needs at least 3 samples, got {n}"
        )));
    }
    let h = traj.step().expect("n >= 3");
    let mut per_sample = vec![None; n];
    let mut worst: f64 = 0.0;
    for i in 1..n - 1 {
        let (a, b, c) = (&traj.samples[i - 1], &traj.samples[i], &traj.samples[i + 1]);
        let acc = (c.vd - a.vd) / (2.0 * h);
        let noise = 8.0 * f64::EPSILON * a.vd.norm().max(c.vd.norm()) / h;
        if acc.norm() <= noise || acc.norm() == 0.0 {
            continue;
        }
        let Some(los) = traj.reference.los_unit(&b.rd) else {
            continue;
        };
        let cos = (acc.dot(&los) / acc.norm()).abs();
        per_sample[i] = Some(cos);
        worst = worst.max(cos);
    }
    Ok(ResidualReport {
        max_orthogonality_cos: worst,
        max_collinearity_dev: traj.max_collinearity_deviation()?,
        per_sample,
    })
}

/// `|k̈ α·α + 2k̇ α̇·α + k α̈·α|` relative to the largest of the three terms,
/// using the path's own `k̈`.
pub fn ode_residual(p: Vec3, target: &TargetModel, path: &KPath, t: f64) -> Result<f64> {
    let s = path.eval(t)?;
    let st = target.eval(t)?;
    let alpha = p - st.position;
    let terms = [
        s.k_ddot * alpha.norm_squared(),
        -2.0 * s.k_dot * st.velocity.dot(&alpha),
        -s.k * st.acceleration.dot(&alpha),
    ];
    let scale = terms.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let sum: f64 = terms.iter().sum();
    Ok(if scale == 0.0 { 0.0 } else { sum.abs() / scale })
}
