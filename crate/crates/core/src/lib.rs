//! Momentum-based topology estimation for serial-chain articulated objects.
//!
//! Given recorded link poses and the wrenches at the two terminal grasps,
//! every candidate assignment of revolute/prismatic joint models is scored by
//! how well the rate of change of the hypothesized system momentum matches
//! the measured net wrench; the best-matching assignment is selected.
//!
//! The crate also contains a fixed-step simulator that produces such
//! recordings for two-link demo objects, a random sinusoidal exploration
//! signal, the `trial/v1` file format and the campaign driver behind the
//! `momentopo` CLI.

pub mod campaign;
pub mod error;
pub mod estimator;
pub mod excitation;
pub mod fixtures;
pub mod model;
pub mod sim;
pub mod spatial;
pub mod trial;

pub use error::{Error, Result};
