//! Camouflage-ratio histories `k(t)` and shadower reconstruction.
//!
//! The closed forms cover a constant-velocity target against a static point
//! (`k̇ ‖α‖²` constant, with `α = P − T`), camouflage at infinity
//! (`k eᵀe = r_Tᵀe + c₁ t + c₂`), the quasi-3D family
//! (`k = c₁ + c₂ ∫ r_T⁻² dt`), and its realisation against a target flying
//! true proportional navigation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{SphericalState, Vec3, RATIO_SLACK};
use crate::ode::{rk4_step, step_count};
use crate::quadrature::adaptive_simpson;
use crate::targets::{ConstantVelocity, Horizon, TargetModel, TargetState};
use crate::trajectory::{Reference, Trajectory, TrajectorySample};

/// Absolute tolerance of the quasi-3D quadrature.
pub const QUASI3D_TOLERANCE: f64 = 1e-9;

/// Default RK4 step for the TPN closed-form histories, s.
pub const TPN_STEP: f64 = 1e-3;

/// `‖α‖` below this fraction of its initial value is treated as the target
/// reaching the static point.
pub const SINGULARITY_FRACTION: f64 = 1e-9;

/// `‖r_D − r_T‖` at or below this fraction of the initial range declares capture.
pub const CAPTURE_FRACTION: f64 = 1e-6;

/// `k`, `k̇` and `k̈` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSample {
    pub k: f64,
    pub k_dot: f64,
    pub k_ddot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndCondition {
    /// Constants fixed by the initial `k₀`, `k̇₀`.
    Open,
    /// `k(t_f) = 1` at a static point, `k(t_f) = 0` at infinity.
    Capture,
    /// `k ≡ 1` at infinity: the shadower holds its initial offset.
    Track,
}

/// A fully specified engagement.
#[derive(Debug, Clone)]
pub struct Engagement {
    pub reference: Reference,
    pub target: TargetModel,
    pub k0: f64,
    pub k0_dot: f64,
    pub tf: f64,
    pub end: EndCondition,
}

impl Engagement {
    pub fn static_point(
        p: Vec3,
        target: TargetModel,
        k0: f64,
        k0_dot: f64,
        tf: f64,
        end: EndCondition,
    ) -> Result<Self> {
        let e = Self {
            reference: Reference::StaticPoint(p),
            target,
            k0,
            k0_dot,
            tf,
            end,
        };
        e.validate()?;
        Ok(e)
    }

    /// Camouflage at infinity with `e = r_T(0) − r_D(0)`.
    pub fn infinity(
        shadower_start: Vec3,
        target: TargetModel,
        k0_dot: f64,
        tf: f64,
        end: EndCondition,
    ) -> Result<Self> {
        let rt0 = target.eval(0.0)?.position;
        let e = Self {
            reference: Reference::Infinity(rt0 - shadower_start),
            target,
            k0: 1.0,
            k0_dot,
            tf,
            end,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tf > 0.0) {
            return Err(Error::InvalidInput(format!("horizon tf = {} must be positive", self.tf)));
        }
        if self.end == EndCondition::Capture && !self.tf.is_finite() {
            return Err(Error::InvalidInput("capture requires a finite horizon".into()));
        }
        if !(self.k0 <= 1.0 + RATIO_SLACK) {
            return Err(Error::RatioOutOfDomain { k: self.k0, t: 0.0 });
        }
        match self.reference {
            Reference::StaticPoint(_) if self.end == EndCondition::Track => Err(Error::InvalidInput(
                "constant-distance tracking is defined for camouflage at infinity".into(),
            )),
            Reference::Infinity(e) if e.norm() == 0.0 => Err(Error::Degenerate(
                "shadower and target coincide at the start; e = 0".into(),
            )),
            _ => Ok(()),
        }
    }

    /// The closed-form k-path for a constant-velocity target.
    pub fn solve_closed_form(&self) -> Result<KPath> {
        let cv = self.target.as_constant_velocity().ok_or_else(|| {
            Error::InvalidInput("closed-form k(t) needs a constant-velocity target".into())
        })?;
        let path = match (self.reference, self.end) {
            (Reference::StaticPoint(p), EndCondition::Open) => {
                k_const_velocity(p, cv, self.k0, self.k0_dot)?
            }
            (Reference::StaticPoint(p), EndCondition::Capture) => {
                k_finite_horizon(p, cv, self.k0, self.tf)?
            }
            (Reference::StaticPoint(_), EndCondition::Track) => unreachable!("rejected by validate"),
            (Reference::Infinity(e), end) => {
                let mode = match end {
                    EndCondition::Open => InfinityMode::Open { k0_dot: self.k0_dot },
                    EndCondition::Capture => InfinityMode::Capture { tf: self.tf },
                    EndCondition::Track => InfinityMode::Track,
                };
                k_infinity(e, cv, mode)?
            }
        };
        Ok(path)
    }
}

/// Constant-velocity target against a static point.
///
/// With `α̈ = 0` the Euler–Lagrange equation reduces to `d/dt (k̇ ‖α‖²) = 0`,
/// so `k = k₀ + c Φ(t)` with `Φ(t) = ∫₀ᵗ ‖α‖⁻² ds`. Since `‖α‖² θ̇ = ‖α₀ × v‖`
/// is conserved, `Φ` is the angle swept by `α` divided by `‖α₀ × v‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstVelPath {
    pub k0: f64,
    /// The conserved `k̇ ‖α‖²`.
    pub c: f64,
    pub p: Vec3,
    pub target: ConstantVelocity,
    alpha0_norm: f64,
    // ‖α₀ × v‖
    sweep_rate: f64,
}

impl ConstVelPath {
    fn new(k0: f64, c: f64, p: Vec3, target: ConstantVelocity) -> Self {
        let alpha0 = p - target.r0;
        Self {
            k0,
            c,
            p,
            target,
            alpha0_norm: alpha0.norm(),
            sweep_rate: alpha0.cross(&target.v).norm(),
        }
    }

    /// `∫₀ᵗ ‖α(s)‖⁻² ds`.
    pub fn phi(&self, t: f64) -> f64 {
        let alpha0 = self.p - self.target.r0;
        let y = alpha0.dot(&(self.p - self.target.position(t)));
        if self.sweep_rate == 0.0 {
            t / y
        } else {
            (self.sweep_rate * t).atan2(y) / self.sweep_rate
        }
    }

    fn sample(&self, t: f64) -> Result<KSample> {
        let alpha = self.p - self.target.position(t);
        let n2 = alpha.norm_squared();
        if n2.sqrt() <= SINGULARITY_FRACTION * self.alpha0_norm {
            return Err(Error::Singularity {
                t,
                what: "target at the static point".into(),
            });
        }
        Ok(KSample {
            k: self.k0 + self.c * self.phi(t),
            k_dot: self.c / n2,
            k_ddot: 2.0 * self.c * alpha.dot(&self.target.v) / (n2 * n2),
        })
    }

    /// Earliest `t ≥ 0` at which `k` reaches 1.
    pub fn capture_time(&self) -> Option<f64> {
        if self.k0 >= 1.0 {
            return Some(0.0);
        }
        if !(self.c > 0.0) {
            return None;
        }
        let target_phi = (1.0 - self.k0) / self.c;
        let alpha0 = self.p - self.target.r0;
        let n02 = alpha0.norm_squared();
        let u = alpha0.dot(&self.target.v);
        let t = if self.sweep_rate == 0.0 {
            let denom = 1.0 + target_phi * u;
            (denom > 0.0).then(|| target_phi * n02 / denom)?
        } else {
            let angle = self.sweep_rate * target_phi;
            if angle >= std::f64::consts::PI {
                return None;
            }
            let (sin, cos) = angle.sin_cos();
            let denom = self.sweep_rate * cos + u * sin;
            (denom > 0.0).then(|| n02 * sin / denom)?
        };
        Some(t)
    }
}

/// Open-ended constant-velocity path from `k₀`, `k̇₀` at `t = 0`.
pub fn k_const_velocity(p: Vec3, target: &ConstantVelocity, k0: f64, k0_dot: f64) -> Result<KPath> {
    let n0 = (p - target.r0).norm();
    if n0 == 0.0 {
        return Err(Error::Degenerate("target starts at the static point".into()));
    }
    let domain = Horizon {
        start: 0.0,
        end: f64::INFINITY,
    };
    check_clear_of_static_point(p, target, domain)?;
    Ok(KPath::new(
        KPathKind::ConstVel(ConstVelPath::new(k0, k0_dot * n0 * n0, p, *target)),
        domain,
    ))
}

/// Constant-velocity path constrained to capture (`k = 1`) at `tf`.
pub fn k_finite_horizon(p: Vec3, target: &ConstantVelocity, k0: f64, tf: f64) -> Result<KPath> {
    if !(tf > 0.0) || !tf.is_finite() {
        return Err(Error::InvalidInput(format!("capture horizon tf = {tf} must be positive and finite")));
    }
    if (p - target.r0).norm() == 0.0 {
        return Err(Error::Degenerate("target starts at the static point".into()));
    }
    let domain = Horizon { start: 0.0, end: tf };
    check_clear_of_static_point(p, target, domain)?;
    let mut path = ConstVelPath::new(k0, 0.0, p, *target);
    path.c = (1.0 - k0) / path.phi(tf);
    Ok(KPath::new(KPathKind::ConstVel(path), domain))
}

fn check_clear_of_static_point(p: Vec3, target: &ConstantVelocity, domain: Horizon) -> Result<()> {
    let alpha0 = p - target.r0;
    let v2 = target.v.norm_squared();
    if v2 == 0.0 {
        return Ok(());
    }
    let t_closest = (alpha0.dot(&target.v) / v2).clamp(domain.start, domain.end);
    let closest = (p - target.position(t_closest)).norm();
    if closest <= SINGULARITY_FRACTION * alpha0.norm() {
        return Err(Error::Degenerate(format!(
            "target passes through the static point at t = {t_closest}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfinityMode {
    Open { k0_dot: f64 },
    Capture { tf: f64 },
    Track,
}

/// Camouflage at infinity against a constant-velocity target:
/// `k eᵀe = r_Tᵀe + c₁ t + c₂`, `k(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfinityPath {
    pub c1: f64,
    pub c2: f64,
    pub e: Vec3,
    pub target: ConstantVelocity,
}

impl InfinityPath {
    fn sample(&self, t: f64) -> KSample {
        let ee = self.e.norm_squared();
        KSample {
            k: (self.target.position(t).dot(&self.e) + self.c1 * t + self.c2) / ee,
            k_dot: (self.target.v.dot(&self.e) + self.c1) / ee,
            k_ddot: 0.0,
        }
    }
}

pub fn k_infinity(e: Vec3, target: &ConstantVelocity, mode: InfinityMode) -> Result<KPath> {
    let ee = e.norm_squared();
    if ee == 0.0 {
        return Err(Error::Degenerate("e = 0: shadower and target coincide at the start".into()));
    }
    let c2 = ee - target.r0.dot(&e);
    let (c1, end) = match mode {
        InfinityMode::Open { k0_dot } => (k0_dot * ee - target.v.dot(&e), f64::INFINITY),
        InfinityMode::Capture { tf } => {
            if !(tf > 0.0) || !tf.is_finite() {
                return Err(Error::InvalidInput(format!("capture horizon tf = {tf} must be positive and finite")));
            }
            ((-target.position(tf).dot(&e) - c2) / tf, tf)
        }
        InfinityMode::Track => (-target.v.dot(&e), f64::INFINITY),
    };
    Ok(KPath::new(
        KPathKind::Infinity(InfinityPath {
            c1,
            c2,
            e,
            target: *target,
        }),
        Horizon { start: 0.0, end },
    ))
}

/// Distance of the target from the static point as a function of time.
#[derive(Clone)]
pub struct RangeFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl RangeFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    fn checked(&self, t: f64) -> Result<f64> {
        let r = (self.0)(t);
        if r > 0.0 && r.is_finite() {
            Ok(r)
        } else {
            Err(Error::Singularity {
                t,
                what: format!("target range from the static point is {r}"),
            })
        }
    }
}

impl fmt::Debug for RangeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RangeFn(..)")
    }
}

/// `k(t) = c₁ + c₂ ∫_{t₀}^{t} r_T(s)⁻² ds`, the ratio history when both agents
/// accelerate only across the line of sight.
#[derive(Debug, Clone)]
pub struct Quasi3DPath {
    pub c1: f64,
    pub c2: f64,
    pub t0: f64,
    pub range: RangeFn,
}

impl Quasi3DPath {
    fn sample(&self, t: f64) -> Result<KSample> {
        let integral = adaptive_simpson(
            &mut |s| self.range.checked(s).map(|r| 1.0 / (r * r)),
            self.t0,
            t,
            QUASI3D_TOLERANCE,
        )?;
        let r = self.range.checked(t)?;
        let h = 1e-5 * t.abs().max(1.0);
        let r_dot = (self.range.checked(t + h)? - self.range.checked(t - h)?) / (2.0 * h);
        Ok(KSample {
            k: self.c1 + self.c2 * integral,
            k_dot: self.c2 / (r * r),
            k_ddot: -2.0 * self.c2 * r_dot / (r * r * r),
        })
    }
}

/// Quasi-3D ratio history on `[t0, tf]`.
pub fn k_quasi3d(c1: f64, c2: f64, range: RangeFn, t0: f64, tf: f64) -> Result<KPath> {
    range.checked(t0)?;
    Ok(KPath::new(
        KPathKind::Quasi3D(Quasi3DPath { c1, c2, t0, range }),
        Horizon::new(t0, tf)?,
    ))
}

/// Planar engagement against a target flying TPN, `a_T = λ ṙ₀ θ̇`, with the
/// target's polar motion about `P` given by `V_r = A cos(θ + B) + λ ṙ₀`,
/// `V_θ = −A sin(θ + B)`.
#[derive(Debug, Clone)]
pub struct TpnPath {
    pub c1: f64,
    pub c2: f64,
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    /// Initial shadower–target range rate.
    pub r0_dot: f64,
    pub p: Vec3,
    pub polar0: SphericalState,
    times: Vec<f64>,
    range: Vec<f64>,
    range_dot: Vec<f64>,
    theta: Vec<f64>,
    theta_dot: Vec<f64>,
    integral: Vec<f64>,
}

impl TpnPath {
    fn locate(&self, t: f64) -> (usize, f64, f64) {
        locate(&self.times, t)
    }

    fn sample(&self, t: f64) -> KSample {
        let (i, s, h) = self.locate(t);
        let r = hermite(self.range[i], self.range[i + 1], self.range_dot[i], self.range_dot[i + 1], s, h);
        let r_dot = hermite_slope(self.range[i], self.range[i + 1], self.range_dot[i], self.range_dot[i + 1], s, h);
        let integral = hermite(
            self.integral[i],
            self.integral[i + 1],
            1.0 / (self.range[i] * self.range[i]),
            1.0 / (self.range[i + 1] * self.range[i + 1]),
            s,
            h,
        );
        KSample {
            k: self.c1 + self.c2 * integral,
            k_dot: self.c2 / (r * r),
            k_ddot: -2.0 * self.c2 * r_dot / (r * r * r),
        }
    }

    /// Target kinematics implied by the closed form.
    pub fn target_state(&self, t: f64) -> TargetState {
        let (i, s, h) = self.locate(t);
        let theta = hermite(self.theta[i], self.theta[i + 1], self.theta_dot[i], self.theta_dot[i + 1], s, h);
        let r = hermite(self.range[i], self.range[i + 1], self.range_dot[i], self.range_dot[i + 1], s, h);
        let v_r = self.a * (theta + self.b).cos() + self.lambda * self.r0_dot;
        let v_theta = -self.a * (theta + self.b).sin();
        let theta_dot = v_theta / r;
        let e_r = Vec3::new(theta.cos(), theta.sin(), 0.0);
        let e_theta = Vec3::new(-theta.sin(), theta.cos(), 0.0);
        TargetState {
            position: self.p + r * e_r,
            velocity: v_r * e_r + v_theta * e_theta,
            acceleration: self.lambda * self.r0_dot * theta_dot * e_theta,
        }
    }

    /// `V_r` and `V_θ` from the closed form at polar angle `theta`.
    pub fn polar_velocity(&self, theta: f64) -> (f64, f64) {
        (
            self.a * (theta + self.b).cos() + self.lambda * self.r0_dot,
            -self.a * (theta + self.b).sin(),
        )
    }

    /// Time at which the history was cut short by `k` reaching 1, if it was.
    pub fn capture_time(&self) -> Option<f64> {
        let last = *self.integral.last()?;
        (self.c1 + self.c2 * last >= 1.0 - 1e-6).then(|| *self.times.last().unwrap())
    }
}

/// Builds the TPN-engagement ratio history. `polar0` is the target's state
/// about `p`; `c1 = k₀` and `c2 = k̇₀ r_T0²`.
pub fn k_tpn_engagement(
    p: Vec3,
    polar0: SphericalState,
    lambda: f64,
    c1: f64,
    c2: f64,
    tf: f64,
    dt: f64,
) -> Result<KPath> {
    if !(dt > 0.0) || !(tf > 0.0) {
        return Err(Error::InvalidInput("TPN history needs dt > 0 and tf > 0".into()));
    }
    let r_t0 = polar0.r;
    let k0 = c1;
    let k0_dot = c2 / (r_t0 * r_t0);
    let r0_dot = (1.0 - k0) * polar0.r_dot - k0_dot * r_t0;
    let num = r_t0 * polar0.theta_dot;
    let den = lambda * r0_dot - polar0.r_dot;
    if num == 0.0 && den == 0.0 {
        return Err(Error::Degenerate(
            "A = 0: no line-of-sight rotation and target radial speed equals λṙ₀".into(),
        ));
    }
    let b = (num / den).atan() - polar0.theta;
    let phase = (polar0.theta + b).cos();
    if phase.abs() < 1e-12 {
        return Err(Error::Degenerate("cos(θ₀ + B) = 0; A undefined".into()));
    }
    let a = (polar0.r_dot - lambda * r0_dot) / phase;

    let mut rhs = |_t: f64, y: &[f64; 3]| {
        let (r, theta) = (y[0], y[1]);
        [
            a * (theta + b).cos() + lambda * r0_dot,
            -a * (theta + b).sin() / r,
            1.0 / (r * r),
        ]
    };

    let steps = step_count(tf, dt);
    let h = tf / steps as f64;
    let mut times = vec![0.0];
    let mut range = vec![r_t0];
    let mut theta = vec![polar0.theta];
    let mut integral = vec![0.0];
    let mut y = [r_t0, polar0.theta, 0.0];
    for i in 0..steps {
        let t = i as f64 * h;
        let next = rk4_step(&mut rhs, t, &y, h);
        let t_next = (i + 1) as f64 * h;
        if !(next[0] > 0.0) || !next.iter().all(|v| v.is_finite()) {
            return Err(Error::Singularity {
                t: t_next,
                what: "target reached the static point".into(),
            });
        }
        if (next[1] + b).sin().abs() < 1e-12 {
            return Err(Error::Singularity {
                t: t_next,
                what: "sin(θ + B) = 0; line-of-sight rate vanishes".into(),
            });
        }
        if c1 + c2 * next[2] > 1.0 {
            break;
        }
        y = next;
        times.push(t_next);
        range.push(y[0]);
        theta.push(y[1]);
        integral.push(y[2]);
    }
    if times.len() < 2 {
        return Err(Error::NoCapture("TPN history is shorter than one step".into()));
    }
    let range_dot = theta
        .iter()
        .map(|th| a * (th + b).cos() + lambda * r0_dot)
        .collect();
    let theta_dot = theta
        .iter()
        .zip(&range)
        .map(|(th, r)| -a * (th + b).sin() / r)
        .collect();
    let domain = Horizon {
        start: 0.0,
        end: *times.last().unwrap(),
    };
    Ok(KPath::new(
        KPathKind::TpnClosedForm(TpnPath {
            c1,
            c2,
            a,
            b,
            lambda,
            r0_dot,
            p,
            polar0,
            times,
            range,
            range_dot,
            theta,
            theta_dot,
            integral,
        }),
        domain,
    ))
}

/// Tabulated ratio history, interpolated by cubic Hermite segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    times: Vec<f64>,
    k: Vec<f64>,
    k_dot: Vec<f64>,
    k_ddot: Option<Vec<f64>>,
}

impl SampledPath {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.k
    }

    pub fn rates(&self) -> &[f64] {
        &self.k_dot
    }

    fn sample(&self, t: f64) -> KSample {
        let (i, s, h) = locate(&self.times, t);
        let k = hermite(self.k[i], self.k[i + 1], self.k_dot[i], self.k_dot[i + 1], s, h);
        match &self.k_ddot {
            Some(acc) => KSample {
                k,
                k_dot: hermite(self.k_dot[i], self.k_dot[i + 1], acc[i], acc[i + 1], s, h),
                k_ddot: hermite_slope(self.k_dot[i], self.k_dot[i + 1], acc[i], acc[i + 1], s, h),
            },
            None => KSample {
                k,
                k_dot: hermite_slope(self.k[i], self.k[i + 1], self.k_dot[i], self.k_dot[i + 1], s, h),
                k_ddot: hermite_curvature(self.k[i], self.k[i + 1], self.k_dot[i], self.k_dot[i + 1], s, h),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub enum KPathKind {
    ConstVel(ConstVelPath),
    Infinity(InfinityPath),
    Quasi3D(Quasi3DPath),
    TpnClosedForm(TpnPath),
    Sampled(SampledPath),
}

/// An evaluable `k(t)` on a closed domain.
#[derive(Debug, Clone)]
pub struct KPath {
    pub kind: KPathKind,
    domain: Horizon,
}

impl KPath {
    fn new(kind: KPathKind, domain: Horizon) -> Self {
        Self { kind, domain }
    }

    /// Tabulated path. `times` strictly increasing, at least two samples.
    pub fn sampled(times: Vec<f64>, k: Vec<f64>, k_dot: Vec<f64>, k_ddot: Option<Vec<f64>>) -> Result<Self> {
        let n = times.len();
        if n < 2 || k.len() != n || k_dot.len() != n || k_ddot.as_ref().is_some_and(|a| a.len() != n) {
            return Err(Error::InvalidInput(
                "sampled k-path needs at least two samples and equal-length columns".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("sampled k-path times must be strictly increasing".into()));
        }
        let domain = Horizon {
            start: times[0],
            end: times[n - 1],
        };
        Ok(Self::new(
            KPathKind::Sampled(SampledPath {
                times,
                k,
                k_dot,
                k_ddot,
            }),
            domain,
        ))
    }

    pub fn domain(&self) -> Horizon {
        self.domain
    }

    /// Restricts (or extends, for closed forms) the evaluation domain.
    pub fn with_domain(mut self, domain: Horizon) -> Self {
        self.domain = domain;
        self
    }

    /// Whether the ratio is measured against a static point (`k ≤ 1` applies).
    fn bounded_by_one(&self) -> bool {
        !matches!(self.kind, KPathKind::Infinity(_))
    }

    /// `k`, `k̇`, `k̈` at `t`.
    pub fn eval(&self, t: f64) -> Result<KSample> {
        if !self.domain.contains(t) {
            return Err(Error::OutsideHorizon {
                t,
                start: self.domain.start,
                end: self.domain.end,
            });
        }
        let s = match &self.kind {
            KPathKind::ConstVel(c) => c.sample(t)?,
            KPathKind::Infinity(c) => c.sample(t),
            KPathKind::Quasi3D(c) => c.sample(t)?,
            KPathKind::TpnClosedForm(c) => c.sample(t),
            KPathKind::Sampled(c) => c.sample(t),
        };
        if self.bounded_by_one() && s.k > 1.0 + RATIO_SLACK {
            return Err(Error::RatioOutOfDomain { k: s.k, t });
        }
        Ok(s)
    }

    pub fn k(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.k)
    }

    pub fn k_dot(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.k_dot)
    }

    /// Earliest capture time inside the domain, where known in closed form
    /// or from the end of a history cut short by capture.
    pub fn capture_time(&self) -> Option<f64> {
        let t = match &self.kind {
            KPathKind::ConstVel(c) => c.capture_time(),
            KPathKind::TpnClosedForm(c) => c.capture_time(),
            KPathKind::Sampled(c) => {
                let last = *c.k.last()?;
                (last >= 1.0 - 1e-9).then(|| *c.times.last().unwrap())
            }
            _ => None,
        }?;
        self.domain.contains(t).then_some(t)
    }
}

fn locate(times: &[f64], t: f64) -> (usize, f64, f64) {
    let idx = times.partition_point(|&x| x <= t);
    let i = idx.saturating_sub(1).min(times.len() - 2);
    let h = times[i + 1] - times[i];
    (i, (t - times[i]) / h, h)
}

fn hermite(y0: f64, y1: f64, d0: f64, d1: f64, s: f64, h: f64) -> f64 {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1
}

fn hermite_slope(y0: f64, y1: f64, d0: f64, d1: f64, s: f64, h: f64) -> f64 {
    let s2 = s * s;
    ((6.0 * s2 - 6.0 * s) * y0 + (-6.0 * s2 + 6.0 * s) * y1) / h
        + (3.0 * s2 - 4.0 * s + 1.0) * d0
        + (3.0 * s2 - 2.0 * s) * d1
}

fn hermite_curvature(y0: f64, y1: f64, d0: f64, d1: f64, s: f64, h: f64) -> f64 {
    ((12.0 * s - 6.0) * (y0 - y1) / h + (6.0 * s - 4.0) * d0 + (6.0 * s - 2.0) * d1) / h
}

/// Shadower positions and velocities from a ratio history.
///
/// Static point: `r_D = P − k (P − r_T)`, `ṙ_D = k ṙ_T − k̇ (P − r_T)`.
/// Infinity: `r_D = r_T − k e`, `ṙ_D = ṙ_T − k̇ e`.
pub fn reconstruct_shadower(engagement: &Engagement, kpath: &KPath, times: &[f64]) -> Result<Trajectory> {
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        let ks = kpath.eval(t)?;
        let tgt = match (&engagement.target, &kpath.kind) {
            (TargetModel::Reactive(_), KPathKind::TpnClosedForm(tpn)) => tpn.target_state(t),
            (model, _) => model.eval(t)?,
        };
        let (rd, vd, ad) = match engagement.reference {
            Reference::StaticPoint(p) => {
                let alpha = p - tgt.position;
                (
                    p - ks.k * alpha,
                    ks.k * tgt.velocity - ks.k_dot * alpha,
                    ks.k * tgt.acceleration + 2.0 * ks.k_dot * tgt.velocity - ks.k_ddot * alpha,
                )
            }
            Reference::Infinity(e) => (
                tgt.position - ks.k * e,
                tgt.velocity - ks.k_dot * e,
                tgt.acceleration - ks.k_ddot * e,
            ),
        };
        samples.push(TrajectorySample {
            t,
            rd,
            vd,
            ad,
            rt: tgt.position,
            vt: tgt.velocity,
            k: ks.k,
            k_dot: ks.k_dot,
        });
    }
    Trajectory::new(engagement.reference, samples)
}

/// `n + 1` evenly spaced times covering `[t0, tf]` with step at most `dt`.
pub fn uniform_times(t0: f64, tf: f64, dt: f64) -> Vec<f64> {
    let n = step_count(tf - t0, dt).max(1);
    let h = (tf - t0) / n as f64;
    (0..=n).map(|i| if i == n { tf } else { t0 + h * i as f64 }).collect()
}
