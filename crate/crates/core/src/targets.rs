//! Shadowee (target) trajectory models.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::spline::CubicSpline;

/// Closed time interval over which a model may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    pub start: f64,
    pub end: f64,
}

impl Horizon {
    pub const UNBOUNDED: Horizon = Horizon {
        start: f64::NEG_INFINITY,
        end: f64::INFINITY,
    };

    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(end > start) {
            return Err(Error::InvalidInput(format!(
                "horizon end {end} must exceed start {start}"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }

    fn check(&self, t: f64) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::OutsideHorizon {
                t,
                start: self.start,
                end: self.end,
            })
        }
    }
}

impl Default for Horizon {
    fn default() -> Self {
        Self::UNBOUNDED
    }
}

/// Position, velocity and acceleration of a target at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
}

/// Straight-line motion at constant velocity: `r(t) = r0 + v t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantVelocity {
    pub r0: Vec3,
    pub v: Vec3,
}

impl ConstantVelocity {
    pub fn new(r0: Vec3, v: Vec3) -> Self {
        Self { r0, v }
    }

    pub fn position(&self, t: f64) -> Vec3 {
        self.r0 + self.v * t
    }
}

/// Uniform circular motion in a plane parallel to x–y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularOrbit {
    pub center: Vec3,
    pub radius: f64,
    /// Angular rate, rad/s; the sign sets the direction of travel.
    pub omega: f64,
    /// Azimuth at t = 0, rad.
    pub phase: f64,
}

impl CircularOrbit {
    fn state(&self, t: f64) -> TargetState {
        let (s, c) = (self.omega * t + self.phase).sin_cos();
        let w = self.omega;
        let r = self.radius;
        TargetState {
            position: self.center + Vec3::new(r * c, r * s, 0.0),
            velocity: Vec3::new(-r * w * s, r * w * c, 0.0),
            acceleration: Vec3::new(-r * w * w * c, -r * w * w * s, 0.0),
        }
    }
}

/// A target track interpolated from samples by a C² cubic spline per axis.
#[derive(Debug, Clone)]
pub struct SampledTarget {
    axes: [CubicSpline; 3],
}

impl SampledTarget {
    pub fn new(times: Vec<f64>, positions: &[Vec3]) -> Result<Self> {
        if times.len() != positions.len() {
            return Err(Error::InvalidInput(format!(
                "{} sample times but {} positions",
                times.len(),
                positions.len()
            )));
        }
        let axis = |j: usize| positions.iter().map(|p| p[j]).collect::<Vec<_>>();
        Ok(Self {
            axes: [
                CubicSpline::new(times.clone(), axis(0))?,
                CubicSpline::new(times.clone(), axis(1))?,
                CubicSpline::new(times, axis(2))?,
            ],
        })
    }

    /// Reads `t, x, y, z` rows from comma-separated text. A non-numeric first
    /// row is treated as a header; lines starting with `#` are skipped.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut times = Vec::new();
        let mut positions = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let parsed: std::result::Result<Vec<f64>, _> =
                record.iter().map(str::parse::<f64>).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if row == 0 => continue,
                Err(e) => {
                    return Err(Error::InvalidInput(format!(
                        "sample row {}: {e}",
                        row + 1
                    )))
                }
            };
            if values.len() != 4 {
                return Err(Error::InvalidInput(format!(
                    "sample row {} has {} columns, expected t,x,y,z",
                    row + 1,
                    values.len()
                )));
            }
            times.push(values[0]);
            positions.push(Vec3::new(values[1], values[2], values[3]));
        }
        Self::new(times, &positions)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn horizon(&self) -> Horizon {
        Horizon {
            start: self.axes[0].start(),
            end: self.axes[0].end(),
        }
    }

    fn state(&self, t: f64) -> Result<TargetState> {
        let mut out = TargetState {
            position: Vec3::zeros(),
            velocity: Vec3::zeros(),
            acceleration: Vec3::zeros(),
        };
        for (j, axis) in self.axes.iter().enumerate() {
            let (p, v, a) = axis.eval(t)?;
            out.position[j] = p;
            out.velocity[j] = v;
            out.acceleration[j] = a;
        }
        Ok(out)
    }
}

/// A target steering itself with true proportional navigation against the
/// shadower. Only the initial state and gain are stored; the trajectory
/// exists only inside a joint guidance simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpnTarget {
    pub r0: Vec3,
    pub v0: Vec3,
    pub lambda: f64,
}

#[derive(Debug, Clone)]
pub enum TargetModel {
    ConstantVelocity {
        motion: ConstantVelocity,
        horizon: Horizon,
    },
    Circular {
        orbit: CircularOrbit,
        horizon: Horizon,
    },
    Sampled(SampledTarget),
    Reactive(TpnTarget),
}

impl TargetModel {
    pub fn constant_velocity(r0: Vec3, v: Vec3) -> Self {
        TargetModel::ConstantVelocity {
            motion: ConstantVelocity::new(r0, v),
            horizon: Horizon::UNBOUNDED,
        }
    }

    pub fn circular(orbit: CircularOrbit) -> Self {
        TargetModel::Circular {
            orbit,
            horizon: Horizon::UNBOUNDED,
        }
    }

    /// Restricts evaluation to `horizon`. Sampled models keep their knot range.
    pub fn with_horizon(self, horizon: Horizon) -> Self {
        match self {
            TargetModel::ConstantVelocity { motion, .. } => {
                TargetModel::ConstantVelocity { motion, horizon }
            }
            TargetModel::Circular { orbit, .. } => TargetModel::Circular { orbit, horizon },
            other => other,
        }
    }

    pub fn horizon(&self) -> Horizon {
        match self {
            TargetModel::ConstantVelocity { horizon, .. } => *horizon,
            TargetModel::Circular { horizon, .. } => *horizon,
            TargetModel::Sampled(s) => s.horizon(),
            TargetModel::Reactive(_) => Horizon::UNBOUNDED,
        }
    }

    pub fn as_constant_velocity(&self) -> Option<&ConstantVelocity> {
        match self {
            TargetModel::ConstantVelocity { motion, .. } => Some(motion),
            _ => None,
        }
    }

    /// Position, velocity and acceleration at `t`.
    pub fn eval(&self, t: f64) -> Result<TargetState> {
        match self {
            TargetModel::ConstantVelocity { motion, horizon } => {
                horizon.check(t)?;
                Ok(TargetState {
                    position: motion.position(t),
                    velocity: motion.v,
                    acceleration: Vec3::zeros(),
                })
            }
            TargetModel::Circular { orbit, horizon } => {
                horizon.check(t)?;
                Ok(orbit.state(t))
            }
            TargetModel::Sampled(s) => s.state(t),
            TargetModel::Reactive(_) => Err(Error::ReactiveTarget),
        }
    }
}

/// Tuple form of [`TargetModel::eval`]: `(position, velocity, acceleration)`.
pub fn eval_target(model: &TargetModel, t: f64) -> Result<(Vec3, Vec3, Vec3)> {
    let s = model.eval(t)?;
    Ok((s.position, s.velocity, s.acceleration))
}

/// Samples `f` at `n` evenly spaced times over `[t0, tf]` and fits a spline.
pub fn sampled_from_function<F>(f: F, t0: f64, tf: f64, n: usize) -> Result<TargetModel>
where
    F: Fn(f64) -> Vec3,
{
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 samples for a C2 interpolant, got {n}"
        )));
    }
    if !(tf > t0) {
        return Err(Error::InvalidInput(format!(
            "sampling interval end {tf} must exceed start {t0}"
        )));
    }
    let step = (tf - t0) / (n - 1) as f64;
    let times: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { tf } else { t0 + step * i as f64 })
        .collect();
    let positions: Vec<Vec3> = times.iter().map(|&t| f(t)).collect();
    Ok(TargetModel::Sampled(SampledTarget::new(times, &positions)?))
}
