use super::{generalized_dynamics_step, measured_terminal_wrenches, SimConfig, SimState};
use crate::error::{Error, Result};
use crate::excitation::SinusoidSpec;
use crate::model::{forward_kinematics, ObjectSpec, Topology};
use crate::spatial::SpatialForce;
use crate::trial::{object_hash, TrialMetadata, TrialRecord, TrialSample, SCHEMA};

/// A sample counts as moving when some joint rate exceeds this (rad/s or m/s).
pub const MOTION_THRESHOLD: f64 = 1e-5;

/// Bookkeeping that goes into the trial header.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub fixture: String,
    pub initial_positions: Vec<f64>,
}

/// Simulates `cfg.duration` seconds under the sinusoidal exploration wrench
/// and records one sample per step.
pub fn run_trial(
    spec: &ObjectSpec,
    topology: &Topology,
    signal: &SinusoidSpec,
    setup: &TrialSetup,
    cfg: &SimConfig,
) -> Result<TrialRecord> {
    run_trial_with(spec, topology, &|t| signal.evaluate(t), Some(*signal), setup, cfg)
}

/// As [`run_trial`] for an arbitrary wrench signal.
pub fn run_trial_with(
    spec: &ObjectSpec,
    topology: &Topology,
    signal: &dyn Fn(f64) -> SpatialForce,
    excitation: Option<SinusoidSpec>,
    setup: &TrialSetup,
    cfg: &SimConfig,
) -> Result<TrialRecord> {
    spec.validate()?;
    cfg.validate()?;
    topology.check_against(spec)?;
    let steps = cfg.step_count();
    if steps < 2 {
        return Err(Error::invalid("a trial needs at least two steps"));
    }
    let mut state = SimState::at_rest(&setup.initial_positions);
    let mut samples = Vec::with_capacity(steps);
    for k in 0..steps {
        state.t = k as f64 * cfg.dt;
        state.applied_wrench = signal(state.t);
        let q: Vec<f64> = state.joints.iter().map(|j| j.q).collect();
        let poses = forward_kinematics(spec, topology, &q)?;
        let outcome = generalized_dynamics_step(spec, topology, &state, state.applied_wrench, cfg)?;
        let (f_left, f_right) = measured_terminal_wrenches(spec, topology, &state, &outcome.acceleration, cfg)?;
        if !(f_left.is_finite() && f_right.is_finite()) {
            return Err(Error::NumericalDivergence { step: k, time: state.t });
        }
        samples.push(TrialSample {
            t: state.t,
            poses: poses.iter().map(|p| p.canonical()).collect(),
            f_left,
            f_right,
            moving: state.joints.iter().any(|j| j.qdot.abs() > MOTION_THRESHOLD),
        });
        state = outcome.next;
    }
    Ok(TrialRecord {
        metadata: TrialMetadata {
            schema: SCHEMA.into(),
            fixture: setup.fixture.clone(),
            object_hash: object_hash(spec),
            object: spec.clone(),
            true_topology: Some(topology.clone()),
            excitation,
            dt: cfg.dt,
            gravity: cfg.gravity,
            seed: cfg.seed,
            link_count: spec.links.len(),
            sample_count: samples.len(),
        },
        samples,
    })
}
