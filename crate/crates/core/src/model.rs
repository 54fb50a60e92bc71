//! Articulated object description: links, one-DOF joints and candidate
//! topologies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::{
    HomogeneousTransform, Pose, Quaternion, Rotation, SpatialInertia, SpatialMotion, Vec3,
};

/// Largest topology enumeration accepted (2^20 candidates).
pub const MAX_ENUMERATED_JOINTS: usize = 20;

const AXIS_TOLERANCE: f64 = 1e-9;
const LIMIT_SLACK: f64 = 1e-12;
const HANDLE_MAX_MASS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum JointModel {
    #[serde(rename = "R")]
    Revolute,
    #[serde(rename = "P")]
    Prismatic,
}

impl JointModel {
    pub const ALL: [JointModel; 2] = [JointModel::Revolute, JointModel::Prismatic];

    pub fn letter(self) -> char {
        match self {
            JointModel::Revolute => 'R',
            JointModel::Prismatic => 'P',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'R' | 'r' => Some(JointModel::Revolute),
            'P' | 'p' => Some(JointModel::Prismatic),
            _ => None,
        }
    }
}

impl fmt::Display for JointModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// One-DOF joint `index` connecting link `index - 1` (parent) to link `index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    pub index: usize,
    /// Joint frame expressed in the parent link frame.
    pub parent_frame: HomogeneousTransform,
    /// Joint frame expressed in the child link frame.
    pub child_frame: HomogeneousTransform,
    /// Unit axis in the joint frame.
    pub axis: Vec3,
    /// `[lo, hi]`, metres for prismatic joints and radians for revolute ones.
    pub limits: [f64; 2],
    #[serde(default)]
    pub damping: f64,
    #[serde(default)]
    pub static_friction: f64,
}

impl JointSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.axis.norm();
        if !n.is_finite() || (n - 1.0).abs() > AXIS_TOLERANCE {
            return Err(Error::invalid(format!(
                "joint {}: axis norm is {n}, expected 1",
                self.index
            )));
        }
        let [lo, hi] = self.limits;
        if !(lo < hi) {
            return Err(Error::invalid(format!(
                "joint {}: limits [{lo}, {hi}] are not increasing",
                self.index
            )));
        }
        if !(self.damping >= 0.0) || !(self.static_friction >= 0.0) {
            return Err(Error::invalid(format!(
                "joint {}: damping and friction must be non-negative",
                self.index
            )));
        }
        Ok(())
    }

    /// Pose of the child link frame in the parent link frame at position `q`.
    pub fn child_in_parent(&self, model: JointModel, q: f64) -> HomogeneousTransform {
        self.parent_frame * joint_transform(model, &self.axis, q) * self.child_frame.inverse()
    }

    pub fn within_limits(&self, q: f64) -> bool {
        q >= self.limits[0] - LIMIT_SLACK && q <= self.limits[1] + LIMIT_SLACK
    }

    pub fn mid_range(&self) -> f64 {
        0.5 * (self.limits[0] + self.limits[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub name: String,
    pub inertia: SpatialInertia,
    /// Virtual massless grip link.
    #[serde(default)]
    pub is_handle: bool,
}

/// Serial chain, anchored side first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub name: String,
    pub links: Vec<LinkSpec>,
    #[serde(default)]
    pub joints: Vec<JointSpec>,
    /// Name of the terminal link welded to the world, if any. Must be the
    /// first link.
    #[serde(default)]
    pub anchored_terminal: Option<String>,
    /// Pose of the first link in the inertial frame at the start of a trial.
    #[serde(default)]
    pub base_pose: Pose,
}

impl ObjectSpec {
    pub fn validate(&self) -> Result<()> {
        if self.links.is_empty() {
            return Err(Error::invalid("object has no links"));
        }
        if self.joints.len() + 1 != self.links.len() {
            return Err(Error::invalid(format!(
                "serial chain with {} links needs {} joints, found {}",
                self.links.len(),
                self.links.len() - 1,
                self.joints.len()
            )));
        }
        for (i, joint) in self.joints.iter().enumerate() {
            if joint.index != i + 1 {
                return Err(Error::invalid(format!(
                    "joint at position {i} has index {}, expected {}",
                    joint.index,
                    i + 1
                )));
            }
            joint.validate()?;
        }
        for link in &self.links {
            if link.is_handle && link.inertia.mass() > HANDLE_MAX_MASS {
                return Err(Error::invalid(format!(
                    "handle link {} has mass {} kg",
                    link.name,
                    link.inertia.mass()
                )));
            }
        }
        if let Some(anchor) = &self.anchored_terminal {
            if anchor != &self.links[0].name {
                return Err(Error::invalid(format!(
                    "anchored terminal {anchor:?} must be the first link ({:?})",
                    self.links[0].name
                )));
            }
        }
        Ok(())
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    pub fn is_anchored(&self) -> bool {
        self.anchored_terminal.is_some()
    }

    /// Same object with masses and inertias multiplied by `k`.
    pub fn scaled_inertia(&self, k: f64) -> Result<Self> {
        let mut out = self.clone();
        for link in &mut out.links {
            link.inertia = link.inertia.scaled(k)?;
        }
        Ok(out)
    }

    pub fn default_positions(&self) -> Vec<f64> {
        self.joints.iter().map(JointSpec::mid_range).collect()
    }
}

/// Assignment of a joint model to every joint index `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Topology(Vec<JointModel>);

impl Topology {
    pub fn new(models: Vec<JointModel>) -> Self {
        Topology(models)
    }

    pub fn empty() -> Self {
        Topology(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn models(&self) -> &[JointModel] {
        &self.0
    }

    /// `(joint index, model)` pairs, indices starting at 1.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, JointModel)> + '_ {
        self.0.iter().enumerate().map(|(i, m)| (i + 1, *m))
    }

    pub fn model(&self, joint_index: usize) -> JointModel {
        self.0[joint_index - 1]
    }

    pub fn check_against(&self, spec: &ObjectSpec) -> Result<()> {
        if self.len() != spec.joint_count() {
            return Err(Error::invalid(format!(
                "topology {self} has {} joints, object has {}",
                self.len(),
                spec.joint_count()
            )));
        }
        Ok(())
    }

    /// Set notation, e.g. `{{1,R},{2,P}}`.
    pub fn set_notation(&self) -> String {
        let body: Vec<String> = self.pairs().map(|(i, m)| format!("{{{i},{m}}}")).collect();
        format!("{{{}}}", body.join(","))
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        for m in &self.0 {
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl FromStr for Topology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "-" || s.is_empty() {
            return Ok(Topology::empty());
        }
        s.chars()
            .map(|c| {
                JointModel::from_letter(c)
                    .ok_or_else(|| Error::invalid(format!("bad joint model letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Topology)
    }
}

impl Serialize for Topology {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Topology {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Joint motion subspace in the joint frame: `(0; axis)` for revolute,
/// `(axis; 0)` for prismatic.
pub fn motion_subspace(model: JointModel, axis: &Vec3) -> Result<SpatialMotion> {
    let n = axis.norm();
    if !n.is_finite() || (n - 1.0).abs() > AXIS_TOLERANCE {
        return Err(Error::invalid(format!("axis norm is {n}, expected 1")));
    }
    Ok(match model {
        JointModel::Revolute => SpatialMotion::new(Vec3::zeros(), *axis),
        JointModel::Prismatic => SpatialMotion::new(*axis, Vec3::zeros()),
    })
}

/// Displacement of the joint's child-side frame relative to its parent-side
/// frame at position `q`.
pub fn joint_transform(model: JointModel, axis: &Vec3, q: f64) -> HomogeneousTransform {
    match model {
        JointModel::Revolute => HomogeneousTransform::from_rotation(Rotation::from_axis_angle(axis, q)),
        JointModel::Prismatic => HomogeneousTransform::from_translation(axis * q),
    }
}

/// All `2^n` topologies, joint 1 varying slowest and `R` before `P`.
pub fn enumerate_topologies(n: usize) -> Result<Vec<Topology>> {
    if n == 0 || n > MAX_ENUMERATED_JOINTS {
        return Err(Error::invalid(format!(
            "joint count {n} outside 1..={MAX_ENUMERATED_JOINTS}"
        )));
    }
    Ok((0..1usize << n)
        .map(|bits| {
            Topology(
                (0..n)
                    .map(|j| {
                        if bits >> (n - 1 - j) & 1 == 0 {
                            JointModel::Revolute
                        } else {
                            JointModel::Prismatic
                        }
                    })
                    .collect(),
            )
        })
        .collect())
}

/// Inertial-frame transform of every link for joint positions `q`.
pub fn link_transforms(
    spec: &ObjectSpec,
    topology: &Topology,
    q: &[f64],
) -> Result<Vec<HomogeneousTransform>> {
    topology.check_against(spec)?;
    if q.len() != spec.joint_count() {
        return Err(Error::invalid(format!(
            "expected {} joint positions, got {}",
            spec.joint_count(),
            q.len()
        )));
    }
    let mut out = Vec::with_capacity(spec.links.len());
    let mut current = spec.base_pose.to_homogeneous();
    out.push(current);
    for (joint, &qi) in spec.joints.iter().zip(q) {
        if !qi.is_finite() || !joint.within_limits(qi) {
            return Err(Error::OutOfRange(format!(
                "joint {} position {qi} outside [{}, {}]",
                joint.index, joint.limits[0], joint.limits[1]
            )));
        }
        current = current * joint.child_in_parent(topology.model(joint.index), qi);
        out.push(current);
    }
    Ok(out)
}

/// Pose of every link frame in the inertial frame, quaternions with `w >= 0`.
pub fn forward_kinematics(spec: &ObjectSpec, topology: &Topology, q: &[f64]) -> Result<Vec<Pose>> {
    Ok(link_transforms(spec, topology, q)?
        .iter()
        .map(|h| h.to_pose())
        .collect())
}

/// Convenience constructor for a joint frame offset by `translation` with no
/// rotation.
pub fn offset_frame(x: f64, y: f64, z: f64) -> HomogeneousTransform {
    HomogeneousTransform::new(Quaternion::IDENTITY.to_rotation(), Vec3::new(x, y, z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_relative_eq;
    use std::collections::HashSet;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn subspace_columns() {
        let p = motion_subspace(JointModel::Prismatic, &Vec3::z()).unwrap();
        assert_eq!(p.to_vector().as_slice(), &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let r = motion_subspace(JointModel::Revolute, &Vec3::z()).unwrap();
        assert_eq!(r.to_vector().as_slice(), &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let twist = motion_subspace(JointModel::Revolute, &Vec3::x()).unwrap() * 2.0;
        assert_eq!(twist.to_vector().as_slice(), &[0.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!(motion_subspace(JointModel::Revolute, &Vec3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn revolute_and_prismatic_columns_are_orthogonal() {
        let axis = Vec3::new(0.6, 0.0, 0.8);
        let r = motion_subspace(JointModel::Revolute, &axis).unwrap().to_vector();
        let p = motion_subspace(JointModel::Prismatic, &axis).unwrap().to_vector();
        assert_eq!(r.dot(&p), 0.0);
    }

    #[test]
    fn enumeration_order() {
        let one = enumerate_topologies(1).unwrap();
        assert_eq!(one, vec!["R".parse().unwrap(), "P".parse().unwrap()]);
        assert_eq!(one[0].set_notation(), "{{1,R}}");
        let two: Vec<String> = enumerate_topologies(2).unwrap().iter().map(|t| t.to_string()).collect();
        assert_eq!(two, ["RR", "RP", "PR", "PP"]);
        assert_eq!(enumerate_topologies(3).unwrap().len(), 8);
        assert!(enumerate_topologies(0).is_err());
        assert!(enumerate_topologies(21).is_err());
    }

    #[test]
    fn enumeration_is_distinct_up_to_ten() {
        for n in 1..=10 {
            let all = enumerate_topologies(n).unwrap();
            assert_eq!(all.len(), 1 << n);
            let set: HashSet<_> = all.iter().collect();
            assert_eq!(set.len(), all.len());
            let mut sorted = all.clone();
            sorted.sort();
            assert_eq!(sorted, all);
        }
    }

    #[test]
    fn zero_configuration_poses() {
        let fx = fixtures::revolute_demo();
        let mut spec = fx.object.clone();
        spec.joints[0].limits = [-1.0, 1.0];
        let poses = forward_kinematics(&spec, &fx.topology, &[0.0]).unwrap();
        assert_eq!(poses[0], Pose::identity());
        assert_relative_eq!(poses[1].position, Vec3::new(0.3, 0.0, 0.0), epsilon = 1e-15);
        assert_eq!(poses[1].orientation, Quaternion::IDENTITY);
    }

    #[test]
    fn prismatic_displacement() {
        let fx = fixtures::prismatic_demo();
        let zero = forward_kinematics(&fx.object, &fx.topology, &[0.0]).unwrap();
        let moved = forward_kinematics(&fx.object, &fx.topology, &[0.1]).unwrap();
        assert_relative_eq!(moved[1].position - zero[1].position, Vec3::new(0.1, 0.0, 0.0), epsilon = 1e-15);
        assert_eq!(moved[1].orientation, zero[1].orientation);
    }

    #[test]
    fn revolute_quarter_turn() {
        // Hand composition: joint at (0.15,0,0) in link 0, child frame 0.15 m
        // further along the rotated x axis, so link 1 sits at (0.15, 0.15, 0)
        // facing +y.
        let fx = fixtures::revolute_demo();
        let mut spec = fx.object.clone();
        spec.joints[0].limits = [0.0, 2.0];
        let poses = forward_kinematics(&spec, &fx.topology, &[FRAC_PI_2]).unwrap();
        assert_relative_eq!(poses[1].position, Vec3::new(0.15, 0.15, 0.0), epsilon = 1e-15);
        let r = poses[1].orientation.to_rotation();
        assert_relative_eq!(r.apply(&Vec3::x()), Vec3::y(), epsilon = 1e-15);
    }

    #[test]
    fn limit_violation_is_out_of_range() {
        let fx = fixtures::prismatic_demo();
        let err = forward_kinematics(&fx.object, &fx.topology, &[0.2]).unwrap_err();
        assert!(matches!(err, Error::OutOfRange(_)));
    }

    #[test]
    fn validation_catches_bad_specs() {
        let fx = fixtures::revolute_demo();
        let mut bad = fx.object.clone();
        bad.joints[0].axis = Vec3::new(0.0, 0.0, 1.1);
        assert!(bad.validate().is_err());
        let mut bad = fx.object.clone();
        bad.joints[0].limits = [1.0, 0.0];
        assert!(bad.validate().is_err());
        let mut bad = fx.object.clone();
        bad.anchored_terminal = Some("link1".into());
        assert!(bad.validate().is_err());
        let mut bad = fx.object.clone();
        bad.joints.clear();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn topology_text_round_trip() {
        for t in enumerate_topologies(3).unwrap() {
            assert_eq!(t.to_string().parse::<Topology>().unwrap(), t);
        }
        assert!("RX".parse::<Topology>().is_err());
    }
}
