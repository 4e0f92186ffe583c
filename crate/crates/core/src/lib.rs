//! Degenerate-metric geodesics with an area constraint.

pub mod error;
mod banded;
pub mod functionals;
pub mod homogeneous;
pub mod io;
pub mod ode;
pub mod potential;
pub mod radial;
pub mod solver;
pub mod wave;

pub use error::{Error, Result};
pub use functionals::{area, area_polar, energy, euclid_length, lift, Curve, Curve3};
pub use potential::{Potential, PotentialSpec, Vec2, Well};
