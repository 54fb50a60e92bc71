//! Fixed-step forward dynamics of an anchored serial chain.

mod dynamics;
mod runner;

pub use dynamics::{
    generalized_dynamics_step, kinetic_energy, measured_terminal_wrenches, StepOutcome, STICTION_VELOCITY,
};
pub use runner::{run_trial, run_trial_with, TrialSetup, MOTION_THRESHOLD};



use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::{SpatialForce, Vec3};

pub const DEFAULT_DT: f64 = 0.001;
pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub gravity: Vec3,
    pub duration: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: DEFAULT_DT,
            gravity: Vec3::new(0.0, 0.0, -STANDARD_GRAVITY),
            duration: 5.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration >= self.dt) {
            return Err(Error::invalid(format!(
                "duration {} shorter than one step of {}",
                self.duration, self.dt
            )));
        }
        if !self.gravity.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("gravity must be finite"));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointState {
    pub q: f64,
    pub qdot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub step: usize,
    pub joints: Vec<JointState>,
    /// Exploration wrench on the free terminal link, in its frame.
    pub applied_wrench: SpatialForce,
}

impl SimState {
    pub fn at_rest(q: &[f64]) -> Self {
        SimState {
            t: 0.0,
            step: 0,
            joints: q.iter().map(|&q| JointState { q, qdot: 0.0 }).collect(),
            applied_wrench: SpatialForce::zero(),
        }
    }
}
