//! Cartesian and spherical kinematics about the static point.
//!
//! Planar engagements use `z = 0`; every operation here maps `z = 0`
//! inputs to `z = 0` outputs.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Cartesian 3-vector. Positions in cm, velocities in cm/s, accelerations in cm/s².
pub type Vec3 = Vector3<f64>;

/// A point is accepted as lying on the constraint line when its distance from
/// the line is at most this fraction of `‖p − rt‖`.
pub const COLLINEARITY_TOLERANCE: f64 = 1e-6;

/// Round-off slack allowed above k = 1 before a ratio is rejected.
pub const RATIO_SLACK: f64 = 1e-9;

/// Position and rates of a point in the spherical frame centred on the static point.
///
/// `theta` is the azimuth in the x–y plane measured from +x, `phi` the elevation
/// above the x–y plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalState {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub r_dot: f64,
    pub theta_dot: f64,
    pub phi_dot: f64,
}

impl SphericalState {
    /// Unit vectors `(e_r, e_theta, e_phi)` at this state's angles.
    pub fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        let e_r = Vec3::new(cp * ct, cp * st, sp);
        let e_theta = Vec3::new(-st, ct, 0.0);
        let e_phi = Vec3::new(-sp * ct, -sp * st, cp);
        (e_r, e_theta, e_phi)
    }
}

/// Distance from `rd` to the infinite line through `p` and `rt`.
pub fn collinearity_deviation(p: &Vec3, rt: &Vec3, rd: &Vec3) -> Result<f64> {
    let axis = rt - p;
    let len = axis.norm();
    if len == 0.0 {
        return Err(Error::Degenerate(
            "target coincides with the static point; constraint line undefined".into(),
        ));
    }
    Ok((rd - p).cross(&axis).norm() / len)
}

/// The camouflage ratio `k` with `p − rd = k (p − rt)`.
pub fn camouflage_ratio(p: &Vec3, rt: &Vec3, rd: &Vec3) -> Result<f64> {
    let alpha = p - rt;
    let scale = alpha.norm();
    let deviation = collinearity_deviation(p, rt, rd)?;
    let tolerance = COLLINEARITY_TOLERANCE * scale;
    if deviation > tolerance {
        return Err(Error::NotCollinear {
            deviation,
            tolerance,
        });
    }
    let k = (p - rd).dot(&alpha) / (scale * scale);
    if k > 1.0 + RATIO_SLACK {
        return Err(Error::RatioOutOfDomain { k, t: f64::NAN });
    }
    Ok(k)
}

/// Angular velocity `Ω = (r × v) / ‖r‖²` of a point relative to the static point.
pub fn angular_velocity(rd: &Vec3, vd: &Vec3) -> Result<Vec3> {
    let r2 = rd.norm_squared();
    if r2 == 0.0 {
        return Err(Error::Degenerate("agent at the static point".into()));
    }
    Ok(rd.cross(vd) / r2)
}

/// Spherical coordinates and rates of `r` (moving with velocity `v`) about origin `p`.
pub fn to_spherical(p: &Vec3, r: &Vec3, v: &Vec3) -> Result<SphericalState> {
    let d = r - p;
    let range = d.norm();
    if range == 0.0 {
        return Err(Error::Degenerate("point coincides with the frame origin".into()));
    }
    let rho2 = d.x * d.x + d.y * d.y;
    let rho = rho2.sqrt();
    let phi = d.z.atan2(rho);
    let r_dot = d.dot(v) / range;

    // On the polar axis the azimuth is taken along the horizontal velocity so
    // the state still reconstructs the velocity.
    let (theta, theta_dot, phi_dot) = if rho == 0.0 {
        let vh = (v.x * v.x + v.y * v.y).sqrt();
        let theta = if vh == 0.0 { 0.0 } else { v.y.atan2(v.x) };
        (theta, 0.0, -d.z.signum() * vh / range)
    } else {
        let theta = d.y.atan2(d.x);
        let theta_dot = (d.x * v.y - d.y * v.x) / rho2;
        let phi_dot = (v.z * rho2 - d.z * (d.x * v.x + d.y * v.y)) / (range * range * rho);
        (theta, theta_dot, phi_dot)
    };

    Ok(SphericalState {
        r: range,
        theta,
        phi,
        r_dot,
        theta_dot,
        phi_dot,
    })
}

/// Inverse of [`to_spherical`]: returns `(position, velocity)` in Cartesian coordinates.
pub fn from_spherical(p: &Vec3, s: &SphericalState) -> (Vec3, Vec3) {
    let (e_r, e_theta, e_phi) = s.basis();
    let position = p + s.r * e_r;
    let velocity =
        s.r_dot * e_r + s.r * s.theta_dot * s.phi.cos() * e_theta + s.r * s.phi_dot * e_phi;
    (position, velocity)
}

/// Rotate a vector +90° about +z. Only meaningful for planar (z = 0) vectors.
pub fn perp_ccw(v: &Vec3) -> Vec3 {
    Vec3::new(-v.y, v.x, 0.0)
}
