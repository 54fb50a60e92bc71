use super::{Pose, Rotation, SpatialMotion};
use crate::error::{Error, Result};

/// Body-frame twist that carries `prev` to `next` over `dt`.
///
/// The angular part is the exact SO(3) logarithm of `R_prevᵀ R_next` divided
/// by `dt`. The linear part is the inertial displacement rate rotated into the
/// orientation halfway along that geodesic, which keeps the estimate
/// second-order for smooth trajectories.
pub fn body_twist_from_poses(prev: &Pose, next: &Pose, dt: f64) -> Result<SpatialMotion> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    let r_prev = prev.orientation.to_rotation();
    let r_next = next.orientation.to_rotation();
    let rel = r_prev.transpose() * r_next;
    let log = rel.log()?;
    let r_mid = r_prev * Rotation::exp(&(log * 0.5));
    let linear = r_mid.transpose().apply(&((next.position - prev.position) / dt));
    Ok(SpatialMotion::new(linear, log / dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{Quaternion, Vec3};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identical_poses_give_zero_twist() {
        let p = Pose::new(Vec3::new(1.0, 2.0, 3.0), Quaternion::from_axis_angle(&Vec3::y(), 0.3));
        assert_eq!(body_twist_from_poses(&p, &p, 0.01).unwrap(), SpatialMotion::zero());
    }

    #[test]
    fn small_z_rotation() {
        let a = Pose::identity();
        let b = Pose::new(Vec3::zeros(), Quaternion::from_axis_angle(&Vec3::z(), 0.001));
        let v = body_twist_from_poses(&a, &b, 0.001).unwrap();
        assert_relative_eq!(v.angular, Vec3::new(0.0, 0.0, 1.0), epsilon = 1e-6);
        assert_eq!(v.linear, Vec3::zeros());
    }

    #[test]
    fn translation_seen_from_rotated_body() {
        let q = Quaternion::from_axis_angle(&Vec3::z(), FRAC_PI_2);
        let a = Pose::new(Vec3::zeros(), q);
        let b = Pose::new(Vec3::new(0.0001, 0.0, 0.0), q);
        let v = body_twist_from_poses(&a, &b, 0.001).unwrap();
        // Rᵀ (0.1, 0, 0) for a quarter turn about z
        assert_relative_eq!(v.linear, Vec3::new(0.0, -0.1, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn bad_inputs() {
        let a = Pose::identity();
        assert!(matches!(body_twist_from_poses(&a, &a, 0.0), Err(Error::InvalidArgument(_))));
        let b = Pose::new(Vec3::zeros(), Quaternion::from_axis_angle(&Vec3::x(), std::f64::consts::PI));
        assert!(matches!(body_twist_from_poses(&a, &b, 0.1), Err(Error::Aliasing { .. })));
    }
}
