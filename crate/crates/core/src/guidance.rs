//! Closed-loop motion-camouflage proportional navigation (MCPN).
//!
//! The shadower is commanded perpendicular to its line of sight to the target
//! with `a_D = k a_T + 2 k̇ r_T θ̇`, where `r_T = ‖r_T − P‖` and `θ̇` is the
//! line-of-sight rate. The target either follows a prescribed track or steers
//! itself with true proportional navigation, `a_T = λ ṙ₀ θ̇`.
//! Engagements are planar (`z = 0`).

use crate::error::{Error, Result};
use crate::geometry::{collinearity_deviation, perp_ccw, Vec3};
use crate::kpath::{Engagement, CAPTURE_FRACTION};
use crate::ode::{rk4_step, step_count};
use crate::targets::TargetModel;
use crate::trajectory::{Reference, Trajectory, TrajectorySample};

/// Default loop step, s.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Largest tolerated collinearity deviation, relative to `‖P − r_T‖`.
pub const CAMOUFLAGE_TOLERANCE: f64 = 1e-3;

/// Measured engagement geometry at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceState {
    pub p: Vec3,
    pub rd: Vec3,
    pub vd: Vec3,
    pub rt: Vec3,
    pub vt: Vec3,
    pub t: f64,
    pub k: f64,
    pub k_dot: f64,
    /// Line-of-sight rate, rad/s, positive counter-clockwise.
    pub theta_dot: f64,
}

impl GuidanceState {
    pub fn measure(p: Vec3, rd: Vec3, vd: Vec3, rt: Vec3, vt: Vec3, t: f64) -> Result<Self> {
        let alpha = p - rt;
        let aa = alpha.norm_squared();
        if aa == 0.0 {
            return Err(Error::Degenerate(format!("target at the static point at t = {t}")));
        }
        let r = rt - rd;
        let rr = r.norm_squared();
        if rr == 0.0 {
            return Err(Error::Degenerate(format!("shadower on the target at t = {t}")));
        }
        let k = (p - rd).dot(&alpha) / aa;
        let k_dot = -(vd - k * vt).dot(&alpha) / aa;
        let rel_v = vt - vd;
        let theta_dot = (r.x * rel_v.y - r.y * rel_v.x) / rr;
        Ok(Self {
            p,
            rd,
            vd,
            rt,
            vt,
            t,
            k,
            k_dot,
            theta_dot,
        })
    }

    /// Unit line of sight from shadower to target.
    pub fn los(&self) -> Vec3 {
        (self.rt - self.rd).normalize()
    }

    /// `los` rotated +90° in the plane.
    pub fn normal(&self) -> Vec3 {
        perp_ccw(&self.los())
    }

    /// Distance of the target from the static point.
    pub fn target_range(&self) -> f64 {
        (self.rt - self.p).norm()
    }

    /// Shadower–target range.
    pub fn range(&self) -> f64 {
        (self.rt - self.rd).norm()
    }

    /// Shadower–target range rate.
    pub fn range_rate(&self) -> f64 {
        (self.rt - self.rd).dot(&(self.vt - self.vd)) / self.range()
    }

    /// `2k̇ / (1 − k)`, the MCPN gain on `r θ̇` for a non-manoeuvring target.
    pub fn gain(&self) -> f64 {
        2.0 * self.k_dot / (1.0 - self.k)
    }
}

/// MCPN shadower command. Only the lateral part of `a_t` is used.
pub fn mcpn_accel(state: &GuidanceState, a_t: Vec3) -> Vec3 {
    let n = state.normal();
    let magnitude = state.k * a_t.dot(&n) + 2.0 * state.k_dot * state.target_range() * state.theta_dot;
    magnitude * n
}

/// TPN target command `λ ṙ₀ θ̇`, perpendicular to the line of sight.
pub fn tpn_accel(state: &GuidanceState, lambda: f64, r0_dot: f64) -> Vec3 {
    lambda * r0_dot * state.theta_dot * state.normal()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    SemiImplicitEuler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceConfig {
    pub dt: f64,
    pub integrator: Integrator,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_STEP,
            integrator: Integrator::SemiImplicitEuler,
        }
    }
}

/// Acceleration split along (`a_r`) and across (`a_theta`) the line of sight.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarAccel {
    pub a_r: f64,
    pub a_theta: f64,
}

impl PolarAccel {
    fn of(a: &Vec3, los: &Vec3) -> Self {
        Self {
            a_r: a.dot(los),
            a_theta: a.dot(&perp_ccw(los)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelRecord {
    pub t: f64,
    pub shadower: PolarAccel,
    pub target: PolarAccel,
}

#[derive(Debug, Clone)]
pub struct GuidanceRun {
    pub trajectory: Trajectory,
    pub accels: Vec<AccelRecord>,
    pub capture_time: Option<f64>,
}

enum TargetLaw<'a> {
    Track(&'a TargetModel),
    Tpn { lambda: f64, r0_dot: f64 },
}

struct Agents {
    rd: Vec3,
    vd: Vec3,
    rt: Vec3,
    vt: Vec3,
}

/// Runs the closed loop from the engagement's initial `k₀`, `k̇₀` until
/// capture or `engagement.tf`.
pub fn simulate_mcpn(engagement: &Engagement, cfg: GuidanceConfig) -> Result<GuidanceRun> {
    let Reference::StaticPoint(p) = engagement.reference else {
        return Err(Error::InvalidInput("MCPN needs a static point".into()));
    };
    if !(cfg.dt > 0.0) || !(engagement.tf > 0.0) || !engagement.tf.is_finite() {
        return Err(Error::InvalidInput("guidance needs dt > 0 and a finite horizon".into()));
    }
    let (rt0, vt0) = match &engagement.target {
        TargetModel::Reactive(tpn) => (tpn.r0, tpn.v0),
        model => {
            let s = model.eval(0.0)?;
            (s.position, s.velocity)
        }
    };
    if p.z != 0.0 || rt0.z != 0.0 || vt0.z != 0.0 {
        return Err(Error::InvalidInput("MCPN engagements are planar (z = 0)".into()));
    }
    let alpha0 = p - rt0;
    let (k0, k0_dot) = (engagement.k0, engagement.k0_dot);
    let mut agents = Agents {
        rd: p - k0 * alpha0,
        vd: k0 * vt0 - k0_dot * alpha0,
        rt: rt0,
        vt: vt0,
    };
    let initial = GuidanceState::measure(p, agents.rd, agents.vd, agents.rt, agents.vt, 0.0)?;
    let law = match &engagement.target {
        TargetModel::Reactive(tpn) => TargetLaw::Tpn {
            lambda: tpn.lambda,
            r0_dot: initial.range_rate(),
        },
        model => TargetLaw::Track(model),
    };
    let initial_range = initial.range();

    let commands = |agents: &Agents, t: f64| -> Result<(GuidanceState, Vec3, Vec3)> {
        let state = GuidanceState::measure(p, agents.rd, agents.vd, agents.rt, agents.vt, t)?;
        let a_t = match law {
            TargetLaw::Track(model) => model.eval(t)?.acceleration,
            TargetLaw::Tpn { lambda, r0_dot } => tpn_accel(&state, lambda, r0_dot),
        };
        let a_d = mcpn_accel(&state, a_t);
        if !a_d.iter().chain(a_t.iter()).all(|x| x.is_finite()) {
            return Err(Error::GainOverflow { t });
        }
        Ok((state, a_d, a_t))
    };

    let steps = step_count(engagement.tf, cfg.dt);
    let h = engagement.tf / steps as f64;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut accels = Vec::with_capacity(steps + 1);
    let mut capture_time = None;
    for i in 0..=steps {
        let t = i as f64 * h;
        if let TargetLaw::Track(model) = law {
            let s = model.eval(t)?;
            agents.rt = s.position;
            agents.vt = s.velocity;
        }
        let (state, a_d, a_t) = commands(&agents, t)?;
        let deviation = collinearity_deviation(&p, &agents.rt, &agents.rd)? / state.target_range();
        if deviation > CAMOUFLAGE_TOLERANCE {
            return Err(Error::LostCamouflage { step: i, t, deviation });
        }
        let los = state.los();
        samples.push(TrajectorySample {
            t,
            rd: agents.rd,
            vd: agents.vd,
            ad: a_d,
            rt: agents.rt,
            vt: agents.vt,
            k: state.k,
            k_dot: state.k_dot,
        });
        accels.push(AccelRecord {
            t,
            shadower: PolarAccel::of(&a_d, &los),
            target: PolarAccel::of(&a_t, &los),
        });
        if state.range() <= CAPTURE_FRACTION * initial_range || state.k >= 1.0 {
            capture_time = Some(t);
            break;
        }
        if i == steps {
            break;
        }
        agents = match cfg.integrator {
            Integrator::SemiImplicitEuler => {
                let vd = agents.vd + a_d * h;
                let vt = agents.vt + a_t * h;
                Agents {
                    rd: agents.rd + vd * h,
                    vd,
                    rt: agents.rt + vt * h,
                    vt,
                }
            }
            Integrator::Rk4 => rk4_agents(&agents, t, h, &commands)?,
        };
    }
    Ok(GuidanceRun {
        trajectory: Trajectory::new(engagement.reference, samples)?,
        accels,
        capture_time,
    })
}

fn rk4_agents<F>(agents: &Agents, t: f64, h: f64, commands: &F) -> Result<Agents>
where
    F: Fn(&Agents, f64) -> Result<(GuidanceState, Vec3, Vec3)>,
{
    let mut failure = None;
    let pack = |a: &Agents| -> [f64; 12] {
        let mut y = [0.0; 12];
        for (slot, v) in [a.rd, a.vd, a.rt, a.vt].iter().enumerate() {
            y[3 * slot..3 * slot + 3].copy_from_slice(v.as_slice());
        }
        y
    };
    let unpack = |y: &[f64; 12]| -> Agents {
        let v = |slot: usize| Vec3::new(y[3 * slot], y[3 * slot + 1], y[3 * slot + 2]);
        Agents {
            rd: v(0),
            vd: v(1),
            rt: v(2),
            vt: v(3),
        }
    };
    let mut rhs = |s: f64, y: &[f64; 12]| -> [f64; 12] {
        let a = unpack(y);
        match commands(&a, s) {
            Ok((_, a_d, a_t)) => {
                let mut d = [0.0; 12];
                for (slot, v) in [a.vd, a_d, a.vt, a_t].iter().enumerate() {
                    d[3 * slot..3 * slot + 3].copy_from_slice(v.as_slice());
                }
                d
            }
            Err(e) => {
                failure.get_or_insert(e);
                [f64::NAN; 12]
            }
        }
    };
    let next = rk4_step(&mut rhs, t, &pack(agents), h);
    match failure {
        Some(e) => Err(e),
        None => Ok(unpack(&next)),
    }
}
