//! Point contact force estimation for slender continuum rods from
//! fiber-Bragg-grating curvature measurements.
//!
//! The crate is organised bottom-up:
//!
//! - [`rod`]: forward mechanics (fast local-frame curvature model, shooting
//!   reference solver, shape reconstruction)
//! - [`force`]: point forces and their conversion to nodal force densities
//! - [`sensor`]: synthetic FBG readings and the measurement CSV format
//! - [`estimator`]: least-squares force recovery, force-count selection and
//!   calibration
//! - [`bench`]: loss maps, accuracy and timing sweeps written as CSV

pub mod bench;
pub mod error;
pub mod estimator;
pub mod force;
mod lm;
pub mod rod;
pub mod sensor;

pub use error::{Error, Result};
