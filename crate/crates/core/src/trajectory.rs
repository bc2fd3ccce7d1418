//! Time-sampled shadower/shadowee records.

use crate::error::{Error, Result};
use crate::geometry::{collinearity_deviation, Vec3};

/// What the shadower camouflages itself against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// A fixed point `P`; the constraint is `P − D = k (P − T)`.
    StaticPoint(Vec3),
    /// A point at infinity in direction `e`; the constraint is `T − D = k e`.
    Infinity(Vec3),
}

impl Reference {
    /// Unit line-of-sight direction at a shadower position: toward `P` for a
    /// static point, along `e` at infinity. `None` when the shadower sits on `P`.
    pub fn los_unit(&self, rd: &Vec3) -> Option<Vec3> {
        match self {
            Reference::StaticPoint(p) => (p - rd).try_normalize(0.0),
            Reference::Infinity(e) => e.try_normalize(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub rd: Vec3,
    pub vd: Vec3,
    pub ad: Vec3,
    pub rt: Vec3,
    pub vt: Vec3,
    pub k: f64,
    pub k_dot: f64,
}

/// Uniformly sampled engagement history with running energy `½∫‖ṙ_D‖² dt`
/// for a unit-mass shadower.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub reference: Reference,
    pub samples: Vec<TrajectorySample>,
    pub cumulative_energy: Vec<f64>,
}

/// Relative slack on uniform spacing.
const SPACING_TOLERANCE: f64 = 1e-6;

impl Trajectory {
    pub fn new(reference: Reference, samples: Vec<TrajectorySample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("trajectory has no samples".into()));
        }
        let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
        check_uniform(&times)?;
        let integrand: Vec<f64> = samples.iter().map(|s| 0.5 * s.vd.norm_squared()).collect();
        let cumulative_energy = cumulative_integral(&times, &integrand);
        Ok(Self {
            reference,
            samples,
            cumulative_energy,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn step(&self) -> Option<f64> {
        (self.samples.len() >= 2).then(|| self.samples[1].t - self.samples[0].t)
    }

    pub fn first(&self) -> &TrajectorySample {
        &self.samples[0]
    }

    pub fn last(&self) -> &TrajectorySample {
        &self.samples[self.samples.len() - 1]
    }

    /// Sub-trajectory over sample indices `range` (inclusive of both ends).
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        Self::new(self.reference, self.samples[from..=to].to_vec())
    }

    /// Largest distance of the shadower from its constraint line relative to
    /// `‖P − T‖` (static point), or largest angle in radians between `T − D`
    /// and `e` (infinity).
    pub fn max_collinearity_deviation(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            let dev = match self.reference {
                Reference::StaticPoint(p) => {
                    collinearity_deviation(&p, &s.rt, &s.rd)? / (p - s.rt).norm()
                }
                Reference::Infinity(e) => {
                    let sep = s.rt - s.rd;
                    if sep.norm() == 0.0 {
                        0.0
                    } else {
                        // angle between the separation and ±e
                        let sin = sep.cross(&e).norm() / (sep.norm() * e.norm());
                        sin.min(1.0).asin()
                    }
                }
            };
            worst = worst.max(dev);
        }
        Ok(worst)
    }

    /// First time at which `‖r_D − r_T‖` drops to `fraction` of its initial value.
    pub fn capture_time(&self, fraction: f64) -> Option<f64> {
        let initial = (self.first().rt - self.first().rd).norm();
        self.samples
            .iter()
            .find(|s| (s.rt - s.rd).norm() <= fraction * initial)
            .map(|s| s.t)
    }
}

pub(crate) fn check_uniform(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Ok(());
    }
    let h = times[1] - times[0];
    if !(h > 0.0) {
        return Err(Error::InvalidInput("sample times must be strictly increasing".into()));
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > SPACING_TOLERANCE * h {
            return Err(Error::InvalidInput(format!(
                "non-uniform sampling at index {}: step {} vs {}",
                i + 1,
                w[1] - w[0],
                h
            )));
        }
    }
    Ok(())
}

/// Running integral on a uniform grid, each interval integrated with the
/// cubic through its four nearest samples (fourth order).
pub(crate) fn cumulative_integral(times: &[f64], f: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let h = (times[n - 1] - times[0]) / (n - 1) as f64;
    for i in 0..n - 1 {
        let piece = if n == 2 {
            0.5 * h * (f[0] + f[1])
        } else if n == 3 {
            if i == 0 {
                h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
            } else {
                h / 12.0 * (-f[0] + 8.0 * f[1] + 5.0 * f[2])
            }
        } else if i == 0 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if i == n - 2 {
            h / 24.0 * (f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1])
        } else {
            h / 24.0 * (-f[i - 1] + 13.0 * f[i] + 13.0 * f[i + 1] - f[i + 2])
        };
        out[i + 1] = out[i] + piece;
    }
    out
}
