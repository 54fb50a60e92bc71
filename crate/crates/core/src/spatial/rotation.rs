use std::f64::consts::PI;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use super::{skew, Mat3, Vec3};
use crate::error::{Error, Result};

/// Largest deviation from unit norm accepted when building a quaternion from
/// raw components. Anything closer is renormalized.
pub const QUATERNION_DRIFT_TOLERANCE: f64 = 1e-6;

const ORTHONORMAL_TOLERANCE: f64 = 1e-9;

/// Relative rotations whose angle is within this margin of pi are rejected by
/// [`Rotation::log`]: the rotation axis is no longer recoverable from the
/// antisymmetric part.
const ALIASING_MARGIN: f64 = 1e-6;

/// Element of SO(3), stored as the body-to-inertial matrix `^A R_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Validates `RᵀR = I` and `det R = 1` to 1e-9.
    pub fn new(m: Mat3) -> Result<Self> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("rotation has non-finite entries"));
        }
        let ortho = (m.transpose() * m - Mat3::identity()).amax();
        let det = m.determinant();
        if ortho > ORTHONORMAL_TOLERANCE || (det - 1.0).abs() > ORTHONORMAL_TOLERANCE {
            return Err(Error::invalid(format!(
                "matrix is not in SO(3): |RᵀR - I| = {ortho:e}, det = {det}"
            )));
        }
        Ok(Rotation(m))
    }

    /// Rodrigues formula. `axis` need not be normalized but must be nonzero.
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        Self::exp(&(axis.normalize() * angle))
    }

    /// Exponential map from a rotation vector.
    pub fn exp(w: &Vec3) -> Self {
        let theta2 = w.norm_squared();
        let theta = theta2.sqrt();
        let k = skew(w);
        let (a, b) = if theta < 1e-6 {
            (1.0 - theta2 / 6.0, 0.5 - theta2 / 24.0)
        } else {
            (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
        };
        Rotation(Mat3::identity() + k * a + k * k * b)
    }

    /// Logarithm map: the rotation vector `θ·axis` with `θ ∈ [0, π)`.
    ///
    /// Fails with [`Error::Aliasing`] when the angle is within 1e-6 of pi.
    pub fn log(&self) -> Result<Vec3> {
        let r = &self.0;
        let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        let w = 0.5 * Vec3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
        let sin = w.norm();
        let theta = sin.atan2(cos);
        if theta >= PI - ALIASING_MARGIN {
            return Err(Error::Aliasing { angle: theta });
        }
        if theta < 1e-8 {
            Ok(w * (1.0 + theta * theta / 6.0))
        } else {
            Ok(w * (theta / sin))
        }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn inverse(&self) -> Self {
        self.transpose()
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }

    /// Shepperd's method, canonicalized to `w >= 0`.
    pub fn to_quaternion(&self) -> Quaternion {
        let m = &self.0;
        let tr = m.trace();
        let (w, x, y, z) = if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            (
                0.25 * s,
                (m[(2, 1)] - m[(1, 2)]) / s,
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(1, 0)] - m[(0, 1)]) / s,
            )
        } else if m[(0, 0)] > m[(1, 1)] && m[(0, 0)] > m[(2, 2)] {
            let s = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt() * 2.0;
            (
                (m[(2, 1)] - m[(1, 2)]) / s,
                0.25 * s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
            )
        } else if m[(1, 1)] > m[(2, 2)] {
            let s = (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt() * 2.0;
            (
                (m[(0, 2)] - m[(2, 0)]) / s,
                (m[(0, 1)] + m[(1, 0)]) / s,
                0.25 * s,
                (m[(1, 2)] + m[(2, 1)]) / s,
            )
        } else {
            let s = (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt() * 2.0;
            (
                (m[(1, 0)] - m[(0, 1)]) / s,
                (m[(0, 2)] + m[(2, 0)]) / s,
                (m[(1, 2)] + m[(2, 1)]) / s,
                0.25 * s,
            )
        };
        Quaternion::normalized_raw(w, x, y, z).canonical()
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

/// Unit quaternion, Hamilton convention, scalar first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Builds a unit quaternion from raw components, renormalizing small drift.
    /// Components whose norm is off by more than 1e-6 are rejected.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !n.is_finite() || (n - 1.0).abs() > QUATERNION_DRIFT_TOLERANCE {
            return Err(Error::invalid(format!(
                "quaternion ({w}, {x}, {y}, {z}) has norm {n}, expected 1"
            )));
        }
        Ok(Quaternion {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Like [`Quaternion::new`] but keeps components bit-for-bit when the norm
    /// is already within tolerance. Used by the trial reader so stored values
    /// survive a round trip unchanged.
    pub(crate) fn from_stored(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(w, x, y, z)?;
        Ok(Quaternion { w, x, y, z })
    }

    fn normalized_raw(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        Quaternion {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        }
    }

    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        let a = axis.normalize();
        let (s, c) = (0.5 * angle).sin_cos();
        Self::normalized_raw(c, a.x * s, a.y * s, a.z * s)
    }

    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn wxyz(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(&self) -> Self {
        Quaternion {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Same rotation with the sign chosen so that `w >= 0`.
    pub fn canonical(&self) -> Self {
        if self.w < 0.0 || (self.w == 0.0 && self.is_negative_pure()) {
            Quaternion {
                w: -self.w,
                x: -self.x,
                y: -self.y,
                z: -self.z,
            }
        } else {
            *self
        }
    }

    fn is_negative_pure(&self) -> bool {
        // tie-break for w == 0: first nonzero vector component positive
        [self.x, self.y, self.z]
            .into_iter()
            .find(|v| *v != 0.0)
            .is_some_and(|v| v < 0.0)
    }

    pub fn to_rotation(&self) -> Rotation {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Rotation(Mat3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ))
    }

    /// Advance by a constant body-frame angular velocity over `dt`:
    /// `q ⊗ exp(ω dt / 2)`, renormalized.
    pub fn integrate(&self, omega_body: &Vec3, dt: f64) -> Result<Self> {
        let angle = omega_body.norm() * dt;
        let step = if angle == 0.0 {
            Quaternion::IDENTITY
        } else {
            Quaternion::from_axis_angle(omega_body, angle)
        };
        let q = *self * step;
        Quaternion::new(q.w, q.x, q.y, q.z)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, r: Quaternion) -> Quaternion {
        let l = self;
        Quaternion {
            w: l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            x: l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            y: l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            z: l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        }
    }
}

impl TryFrom<[f64; 4]> for Quaternion {
    type Error = Error;
    fn try_from(c: [f64; 4]) -> Result<Self> {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        q.wxyz()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn rodrigues(axis: Vec3, angle: f64) -> Mat3 {
        // independent oracle: R = cI + s[k]x + (1-c) k kᵀ
        let k = axis.normalize();
        let (s, c) = angle.sin_cos();
        Mat3::identity() * c + skew(&k) * s + k * k.transpose() * (1.0 - c)
    }

    #[test]
    fn identity_quaternion_is_identity_rotation() {
        assert_eq!(Quaternion::IDENTITY.to_rotation().matrix(), &Mat3::identity());
    }

    #[test]
    fn quarter_turn_about_z() {
        let q = Quaternion::new(FRAC_PI_4.cos(), 0.0, 0.0, FRAC_PI_4.sin()).unwrap();
        let r = q.to_rotation();
        let oracle = rodrigues(Vec3::z(), std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(*r.matrix(), oracle, epsilon = 1e-15);
        assert_relative_eq!(r.matrix().column(0).into_owned(), Vec3::new(0.0, 1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_unit_components() {
        assert!(Quaternion::new(1.1, 0.0, 0.0, 0.0).is_err());
        assert!(Quaternion::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
        let q = Quaternion::new(1.0 + 5e-7, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(q.w(), 1.0);
    }

    #[test]
    fn log_of_small_z_rotation() {
        let r = Rotation::from_axis_angle(&Vec3::z(), 0.001);
        let w = r.log().unwrap();
        assert_relative_eq!(w, Vec3::new(0.0, 0.0, 0.001), epsilon = 1e-15);
    }

    #[test]
    fn log_rejects_half_turn() {
        let r = Rotation::from_axis_angle(&Vec3::x(), PI);
        assert!(matches!(r.log(), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn rotation_new_validates() {
        assert!(Rotation::new(Mat3::identity() * 2.0).is_err());
        let reflect = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(Rotation::new(reflect).is_err());
        assert!(Rotation::new(rodrigues(Vec3::new(1.0, 2.0, 3.0), 0.7)).is_ok());
    }

    #[test]
    fn integration_keeps_unit_norm() {
        let mut q = Quaternion::IDENTITY;
        let omega = Vec3::new(0.3, -1.7, 2.9);
        for _ in 0..5000 {
            q = q.integrate(&omega, 1e-3).unwrap();
            assert!((q.norm() - 1.0).abs() < 1e-9);
        }
        // constant body rate: closed form exp(5 s · ω)
        let expected = Rotation::exp(&(omega * 5.0));
        assert_relative_eq!(*q.to_rotation().matrix(), *expected.matrix(), epsilon = 1e-9);
    }
}
