use std::ops::Mul;

use serde::{Deserialize, Serialize};

use super::{blocks, skew, Mat3, Mat6, Quaternion, Rotation, SpatialForce, SpatialMotion, Vec3};
use crate::error::{Error, Result};

/// Position and orientation of a frame with respect to the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Quaternion,
}

impl Pose {
    pub fn new(position: Vec3, orientation: Quaternion) -> Self {
        Pose {
            position,
            orientation,
        }
    }

    pub fn identity() -> Self {
        Pose::new(Vec3::zeros(), Quaternion::IDENTITY)
    }

    pub fn to_homogeneous(&self) -> HomogeneousTransform {
        HomogeneousTransform::new(self.orientation.to_rotation(), self.position)
    }

    /// Quaternion sign flipped so that `w >= 0`.
    pub fn canonical(&self) -> Self {
        Pose::new(self.position, self.orientation.canonical())
    }
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

/// Rigid transform `H = [R p; 0 1]` taking coordinates in a child frame to a
/// parent frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Pose", into = "Pose")]
pub struct HomogeneousTransform {
    rotation: Rotation,
    translation: Vec3,
}

impl HomogeneousTransform {
    pub fn new(rotation: Rotation, translation: Vec3) -> Self {
        HomogeneousTransform {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Rotation::identity(), Vec3::zeros())
    }

    pub fn from_translation(p: Vec3) -> Self {
        Self::new(Rotation::identity(), p)
    }

    pub fn from_rotation(r: Rotation) -> Self {
        Self::new(r, Vec3::zeros())
    }

    /// `rot(H)`.
    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }

    /// `lin(H)`.
    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -(rt.apply(&self.translation)))
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation.apply(p) + self.translation
    }

    pub fn to_pose(&self) -> Pose {
        Pose::new(self.translation, self.rotation.to_quaternion())
    }

    pub fn matrix(&self) -> nalgebra::Matrix4<f64> {
        let mut m = nalgebra::Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    pub fn motion_transform(&self) -> MotionTransform {
        MotionTransform::from_homogeneous(self)
    }

    pub fn force_transform(&self) -> ForceTransform {
        ForceTransform::from_homogeneous(self)
    }
}

impl Mul for HomogeneousTransform {
    type Output = HomogeneousTransform;
    fn mul(self, rhs: HomogeneousTransform) -> HomogeneousTransform {
        HomogeneousTransform::new(
            self.rotation * rhs.rotation,
            self.rotation.apply(&rhs.translation) + self.translation,
        )
    }
}

impl TryFrom<Pose> for HomogeneousTransform {
    type Error = Error;
    fn try_from(p: Pose) -> Result<Self> {
        Ok(p.to_homogeneous())
    }
}

impl From<HomogeneousTransform> for Pose {
    fn from(h: HomogeneousTransform) -> Pose {
        h.to_pose()
    }
}

/// 6x6 transform for twists, `X = [R  S(p)R; 0  R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionTransform(Mat6);

impl MotionTransform {
    pub fn from_homogeneous(h: &HomogeneousTransform) -> Self {
        let r = h.rotation.matrix();
        let spr = skew(&h.translation) * r;
        MotionTransform(blocks(r, &spr, &Mat3::zeros(), r))
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.0
    }

    pub fn apply(&self, v: &SpatialMotion) -> SpatialMotion {
        SpatialMotion::from_vector(&(self.0 * v.to_vector()))
    }

    /// Closed-form inverse `[Rᵀ  -RᵀS(p); 0  Rᵀ]`.
    pub fn inverse(&self) -> Self {
        let rt = self.0.fixed_view::<3, 3>(0, 0).transpose();
        let spr = self.0.fixed_view::<3, 3>(0, 3).into_owned();
        MotionTransform(blocks(&rt, &(-(rt * spr * rt)), &Mat3::zeros(), &rt))
    }
}

impl Mul for MotionTransform {
    type Output = MotionTransform;
    fn mul(self, rhs: MotionTransform) -> MotionTransform {
        MotionTransform(self.0 * rhs.0)
    }
}

/// 6x6 transform for wrenches, `X* = X⁻ᵀ = [R  0; S(p)R  R]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceTransform(Mat6);

impl ForceTransform {
    pub fn from_homogeneous(h: &HomogeneousTransform) -> Self {
        let r = h.rotation.matrix();
        let spr = skew(&h.translation) * r;
        ForceTransform(blocks(r, &Mat3::zeros(), &spr, r))
    }

    pub fn matrix(&self) -> &Mat6 {
        &self.0
    }

    pub fn apply(&self, f: &SpatialForce) -> SpatialForce {
        SpatialForce::from_vector(&(self.0 * f.to_vector()))
    }
}

impl Mul for ForceTransform {
    type Output = ForceTransform;
    fn mul(self, rhs: ForceTransform) -> ForceTransform {
        ForceTransform(self.0 * rhs.0)
    }
}
