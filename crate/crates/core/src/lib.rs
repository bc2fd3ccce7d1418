//! Energy-optimal motion camouflage.
//!
//! A shadower `D` camouflages its motion against a target `T` by staying on the
//! line through `T` and a fixed point `P`, so that `P − D = k (P − T)`. Among
//! all such paths, the ones minimising `½∫‖ṙ_D‖² dt` have shadower
//! acceleration orthogonal to the line of sight. This crate builds those paths
//! in closed form, by integrating the Euler–Lagrange equation for `k`, and by
//! closed-loop proportional-navigation guidance, and compares their energy
//! with a straight-line camouflaged interception.

pub mod elode;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod guidance;
pub mod kpath;
pub mod ode;
pub mod quadrature;
pub mod scenario;
pub mod spline;
pub mod targets;
pub mod trajectory;

pub use error::{Error, Result};
pub use geometry::Vec3;
