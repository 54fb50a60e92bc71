use nalgebra::{DMatrix, DVector};

use super::{JointState, SimConfig, SimState};
use crate::error::{Error, Result};
use crate::model::{link_transforms, motion_subspace, ObjectSpec, Topology};
use crate::spatial::{
    momentum, ForceTransform, HomogeneousTransform, MotionTransform, SpatialForce, SpatialMotion, Vec3,
};

/// Joints slower than this are candidates for sticking.
pub const STICTION_VELOCITY: f64 = 1e-4;

/// Kinematic quantities of the chain at one configuration.
pub(crate) struct ChainFrames {
    /// Inertial pose of every link.
    pub world: Vec<HomogeneousTransform>,
    /// `X_{i <- i-1}` for link `i >= 1` (index 0 unused).
    pub motion_from_parent: Vec<MotionTransform>,
    /// `X*_{i-1 <- i}` for link `i >= 1` (index 0 unused).
    pub force_to_parent: Vec<ForceTransform>,
    /// Joint motion subspace in the child link frame, link `i >= 1`.
    pub subspace: Vec<SpatialMotion>,
}

impl ChainFrames {
    pub fn new(spec: &ObjectSpec, topology: &Topology, q: &[f64]) -> Result<Self> {
        let world = link_transforms(spec, topology, q)?;
        let n = spec.joint_count();
        let mut motion_from_parent = vec![MotionTransform::from_homogeneous(&HomogeneousTransform::identity()); n + 1];
        let mut force_to_parent = vec![ForceTransform::from_homogeneous(&HomogeneousTransform::identity()); n + 1];
        let mut subspace = vec![SpatialMotion::zero(); n + 1];
        for (joint, &qi) in spec.joints.iter().zip(q) {
            let i = joint.index;
            let model = topology.model(i);
            let child_in_parent = joint.child_in_parent(model, qi);
            motion_from_parent[i] = child_in_parent.inverse().motion_transform();
            force_to_parent[i] = child_in_parent.force_transform();
            subspace[i] = joint.child_frame.motion_transform().apply(&motion_subspace(model, &joint.axis)?);
        }
        Ok(ChainFrames {
            world,
            motion_from_parent,
            force_to_parent,
            subspace,
        })
    }
}

pub(crate) struct InverseDynamics {
    pub tau: Vec<f64>,
    /// Wrench transmitted from link `i-1` to link `i` through joint `i`, in
    /// link `i`'s frame (index 0 unused).
    pub joint_wrench: Vec<SpatialForce>,
}

/// Gravity wrench on a link about its frame origin, in its own frame.
pub(crate) fn gravity_wrench(spec: &ObjectSpec, frames: &ChainFrames, link: usize, gravity: &Vec3) -> SpatialForce {
    let inertia = &spec.links[link].inertia;
    let force = frames.world[link].rotation().transpose().apply(gravity) * inertia.mass();
    SpatialForce::new(force, inertia.com().cross(&force))
}

/// Recursive Newton-Euler over the anchored chain (link 0 fixed).
/// `external` acts on the last link, in its frame.
pub(crate) fn inverse_dynamics(
    spec: &ObjectSpec,
    frames: &ChainFrames,
    qdot: &[f64],
    qddot: &[f64],
    gravity: Option<&Vec3>,
    external: &SpatialForce,
) -> InverseDynamics {
    let n = spec.joint_count();
    let mut vel = vec![SpatialMotion::zero(); n + 1];
    let mut acc = vec![SpatialMotion::zero(); n + 1];
    let mut wrench = vec![SpatialForce::zero(); n + 1];
    for i in 1..=n {
        let s = frames.subspace[i];
        let joint_vel = s * qdot[i - 1];
        vel[i] = frames.motion_from_parent[i].apply(&vel[i - 1]) + joint_vel;
        acc[i] = frames.motion_from_parent[i].apply(&acc[i - 1]) + s * qddot[i - 1] + vel[i].cross_motion(&joint_vel);
        let inertia = &spec.links[i].inertia;
        let h = momentum(inertia, &vel[i]);
        wrench[i] = momentum(inertia, &acc[i]) + vel[i].cross_force(&h);
        if let Some(g) = gravity {
            wrench[i] = wrench[i] - gravity_wrench(spec, frames, i, g);
        }
    }
    if n > 0 {
        wrench[n] = wrench[n] - *external;
    }
    let mut tau = vec![0.0; n];
    for i in (1..=n).rev() {
        tau[i - 1] = frames.subspace[i].dot(&wrench[i]);
        if i > 1 {
            let to_parent = frames.force_to_parent[i].apply(&wrench[i]);
            wrench[i - 1] += to_parent;
        }
    }
    InverseDynamics {
        tau,
        joint_wrench: wrench,
    }
}

/// Joint-space inertia matrix, one inverse-dynamics pass per column.
pub(crate) fn mass_matrix(spec: &ObjectSpec, frames: &ChainFrames) -> DMatrix<f64> {
    let n = spec.joint_count();
    let zeros = vec![0.0; n];
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut unit = vec![0.0; n];
        unit[j] = 1.0;
        let col = inverse_dynamics(spec, frames, &zeros, &unit, None, &SpatialForce::zero()).tau;
        for (i, v) in col.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

/// Result of one integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Joint accelerations actually realized over the step,
    /// `(qdot_next - qdot) / dt`, including friction stops and limit impacts.
    pub acceleration: Vec<f64>,
    pub next: SimState,
}

fn check_chain(spec: &ObjectSpec, topology: &Topology, state: &SimState) -> Result<()> {
    if !spec.is_anchored() {
        return Err(Error::invalid("the chain simulator needs an anchored terminal"));
    }
    topology.check_against(spec)?;
    if state.joints.len() != spec.joint_count() {
        return Err(Error::invalid(format!(
            "state has {} joints, object has {}",
            state.joints.len(),
            spec.joint_count()
        )));
    }
    Ok(())
}

/// Advances the anchored chain by one semi-implicit Euler step under gravity,
/// joint damping, Coulomb friction with stiction and the wrench `external`
/// applied to the free terminal link (in its frame).
pub fn generalized_dynamics_step(
    spec: &ObjectSpec,
    topology: &Topology,
    state: &SimState,
    external: SpatialForce,
    cfg: &SimConfig,
) -> Result<StepOutcome> {
    check_chain(spec, topology, state)?;
    let n = spec.joint_count();
    let dt = cfg.dt;
    let q: Vec<f64> = state.joints.iter().map(|j| j.q).collect();
    let qdot: Vec<f64> = state.joints.iter().map(|j| j.qdot).collect();
    let frames = ChainFrames::new(spec, topology, &q)?;

    let zeros = vec![0.0; n];
    let bias = inverse_dynamics(spec, &frames, &qdot, &zeros, Some(&cfg.gravity), &external).tau;
    let mass = mass_matrix(spec, &frames);

    // generalized force before friction
    let drive: Vec<f64> = (0..n)
        .map(|i| -bias[i] - spec.joints[i].damping * qdot[i])
        .collect();

    let mut locked = vec![false; n];
    let mut generalized = drive.clone();
    for i in 0..n {
        let fs = spec.joints[i].static_friction;
        if fs == 0.0 {
            continue;
        }
        if qdot[i].abs() < STICTION_VELOCITY {
            if drive[i].abs() <= fs {
                locked[i] = true;
            } else {
                generalized[i] -= fs * drive[i].signum();
            }
        } else {
            generalized[i] -= fs * qdot[i].signum();
        }
    }

    let free: Vec<usize> = (0..n).filter(|&i| !locked[i]).collect();
    let mut qddot = vec![0.0; n];
    if !free.is_empty() {
        let m_ff = DMatrix::from_fn(free.len(), free.len(), |a, b| mass[(free[a], free[b])]);
        let rhs = DVector::from_iterator(free.len(), free.iter().map(|&i| generalized[i]));
        let sol = m_ff
            .clone()
            .cholesky()
            .map(|c| c.solve(&rhs))
            .or_else(|| m_ff.lu().solve(&rhs))
            .ok_or(Error::NumericalDivergence {
                step: state.step,
                time: state.t,
            })?;
        for (a, &i) in free.iter().enumerate() {
            qddot[i] = sol[a];
        }
    }

    let mut joints = Vec::with_capacity(n);
    let mut realized = Vec::with_capacity(n);
    for i in 0..n {
        let spec_j = &spec.joints[i];
        let mut v = if locked[i] { 0.0 } else { qdot[i] + dt * qddot[i] };
        // friction cannot reverse the direction of motion within a step
        if spec_j.static_friction > 0.0 && qdot[i].abs() >= STICTION_VELOCITY && v * qdot[i] < 0.0 {
            v = 0.0;
        }
        let mut p = q[i] + dt * v;
        let [lo, hi] = spec_j.limits;
        // Inelastic stop. The step's velocity is cut to what reaches the
        // stop, so `q_next - q = dt * v` still holds and recorded poses stay
        // consistent with the reaction wrench; at the stop this is zero.
        if p > hi || p < lo {
            p = p.clamp(lo, hi);
            v = (p - q[i]) / dt;
        }
        if !(p.is_finite() && v.is_finite()) {
            return Err(Error::NumericalDivergence {
                step: state.step,
                time: state.t,
            });
        }
        realized.push((v - qdot[i]) / dt);
        joints.push(JointState { q: p, qdot: v });
    }

    Ok(StepOutcome {
        acceleration: realized,
        next: SimState {
            t: state.t + dt,
            step: state.step + 1,
            joints,
            applied_wrench: external,
        },
    })
}

/// Wrenches seen at the two grasps for `state` moving with joint
/// accelerations `acceleration`, with the exploration wrench
/// `state.applied_wrench` acting on the free terminal.
///
/// Both are wrenches the object exerts on the grasp, so the object itself
/// receives their negatives. `f_left` follows from the anchored link's
/// Newton-Euler balance against gravity and the wrench transmitted through
/// joint 1; it is expressed in the anchored link frame. `f_right` is the
/// negated exploration wrench in the free link frame.
pub fn measured_terminal_wrenches(
    spec: &ObjectSpec,
    topology: &Topology,
    state: &SimState,
    acceleration: &[f64],
    cfg: &SimConfig,
) -> Result<(SpatialForce, SpatialForce)> {
    check_chain(spec, topology, state)?;
    let q: Vec<f64> = state.joints.iter().map(|j| j.q).collect();
    let qdot: Vec<f64> = state.joints.iter().map(|j| j.qdot).collect();
    let frames = ChainFrames::new(spec, topology, &q)?;
    let applied = state.applied_wrench;
    let g0 = gravity_wrench(spec, &frames, 0, &cfg.gravity);
    let anchor = if spec.joint_count() == 0 {
        -(g0 + applied)
    } else {
        let id = inverse_dynamics(spec, &frames, &qdot, acceleration, Some(&cfg.gravity), &applied);
        frames.force_to_parent[1].apply(&id.joint_wrench[1]) - g0
    };
    Ok((-anchor, -applied))
}

/// Total kinetic energy `½ Σ vᵢᵀ Mᵢ vᵢ` of the chain.
pub fn kinetic_energy(spec: &ObjectSpec, topology: &Topology, state: &SimState) -> Result<f64> {
    let q: Vec<f64> = state.joints.iter().map(|j| j.q).collect();
    let frames = ChainFrames::new(spec, topology, &q)?;
    let mut v = SpatialMotion::zero();
    let mut e = 0.0;
    for i in 1..=spec.joint_count() {
        v = frames.motion_from_parent[i].apply(&v) + frames.subspace[i] * state.joints[i - 1].qdot;
        e += 0.5 * v.dot(&momentum(&spec.links[i].inertia, &v));
    }
    Ok(e)
}
