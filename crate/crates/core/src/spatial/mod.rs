//! Spatial vector algebra in the linear-first convention.
//!
//! Motion vectors are stored as `(linear; angular)` and force vectors as
//! `(force; moment)`. Every 6x6 block below is laid out for that ordering,
//! which differs from the angular-first layout used by most rigid-body
//! dynamics texts.

mod inertia;
mod rotation;
mod transform;
mod twist;
mod vector;

pub use inertia::{momentum, SpatialInertia};
pub use rotation::{Quaternion, Rotation, QUATERNION_DRIFT_TOLERANCE};
pub use transform::{ForceTransform, HomogeneousTransform, MotionTransform, Pose};
pub use twist::body_twist_from_poses;
pub use vector::{SpatialForce, SpatialMotion};

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Vec6 = Vector6<f64>;
pub type Mat6 = Matrix6<f64>;

/// Cross-product matrix: `skew(u) * v == u.cross(v)`.
pub fn skew(u: &Vec3) -> Mat3 {
    Mat3::new(0.0, -u.z, u.y, u.z, 0.0, -u.x, -u.y, u.x, 0.0)
}

/// Assemble a 6x6 matrix from four 3x3 blocks `[a b; c d]`.
pub(crate) fn blocks(a: &Mat3, b: &Mat3, c: &Mat3, d: &Mat3) -> Mat6 {
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(a);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(b);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(c);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(d);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skew_matches_explicit_matrix() {
        let s = skew(&Vec3::new(1.0, 2.0, 3.0));
        let expected = Mat3::new(0.0, -3.0, 2.0, 3.0, 0.0, -1.0, -2.0, 1.0, 0.0);
        assert_eq!(s, expected);
    }

    #[test]
    fn skew_of_zero_is_zero() {
        assert_eq!(skew(&Vec3::zeros()), Mat3::zeros());
    }

    #[test]
    fn skew_annihilates_its_argument() {
        let u = Vec3::new(0.3, -1.1, 2.0);
        assert!((skew(&u) * u).norm() < 1e-15);
    }

    #[test]
    fn skew_is_antisymmetric_and_matches_cross_on_integers() {
        for (u, v) in [
            (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)),
            (Vec3::new(2.0, -3.0, 5.0), Vec3::new(-7.0, 11.0, 13.0)),
            (Vec3::new(-4.0, 6.0, -1.0), Vec3::new(9.0, 0.0, -2.0)),
        ] {
            let s = skew(&u);
            assert_eq!(s.transpose(), -s);
            assert_eq!(s * v, u.cross(&v));
        }
    }
}
