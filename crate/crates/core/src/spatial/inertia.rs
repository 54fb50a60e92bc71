use serde::{Deserialize, Serialize};

use super::{blocks, skew, Mat3, Mat6, SpatialForce, SpatialMotion, Vec3};
use crate::error::{Error, Result};

/// Rigid-body inertia about the body frame origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InertiaRepr", into = "InertiaRepr")]
pub struct SpatialInertia {
    mass: f64,
    com: Vec3,
    inertia_at_origin: Mat3,
}

/// File representation: mass, center of mass and rotational inertia about
/// the center of mass (the quantity CAD tools report).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct InertiaRepr {
    mass: f64,
    com: [f64; 3],
    /// Row-major 3x3 about the center of mass.
    inertia_com: [[f64; 3]; 3],
}

impl SpatialInertia {
    /// From mass, center of mass `c` (body frame) and inertia `I_c` about
    /// the center of mass; `I_B = I_c - m S(c) S(c)`.
    pub fn from_com(mass: f64, com: Vec3, inertia_com: Mat3) -> Result<Self> {
        let s = skew(&com);
        let inertia_at_origin = inertia_com - s * s * mass;
        Self::new(mass, com, inertia_at_origin)
    }

    /// Validates `m > 0`, symmetry of `I_B` to 1e-12, and that `I_c` is
    /// positive definite.
    pub fn new(mass: f64, com: Vec3, inertia_at_origin: Mat3) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::invalid(format!("mass must be positive, got {mass}")));
        }
        if !com.iter().chain(inertia_at_origin.iter()).all(|v| v.is_finite()) {
            return Err(Error::invalid("inertia has non-finite entries"));
        }
        let asym = (inertia_at_origin - inertia_at_origin.transpose()).amax();
        if asym > 1e-12 {
            return Err(Error::invalid(format!("rotational inertia is not symmetric ({asym:e})")));
        }
        let out = SpatialInertia {
            mass,
            com,
            inertia_at_origin,
        };
        let ic = out.inertia_at_com();
        if ic.cholesky().is_none() {
            return Err(Error::invalid("rotational inertia about the center of mass is not positive definite"));
        }
        Ok(out)
    }

    /// Uniform solid box centered on the body frame origin.
    pub fn solid_box(mass: f64, size: Vec3) -> Result<Self> {
        let (x2, y2, z2) = (size.x * size.x, size.y * size.y, size.z * size.z);
        let ic = Mat3::from_diagonal(&Vec3::new(y2 + z2, x2 + z2, x2 + y2)) * (mass / 12.0);
        Self::from_com(mass, Vec3::zeros(), ic)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn com(&self) -> &Vec3 {
        &self.com
    }

    pub fn inertia_at_origin(&self) -> &Mat3 {
        &self.inertia_at_origin
    }

    pub fn inertia_at_com(&self) -> Mat3 {
        let s = skew(&self.com);
        self.inertia_at_origin + s * s * self.mass
    }

    /// `M = [m 1₃  -m S(c); m S(c)  I_B]`.
    pub fn matrix(&self) -> Mat6 {
        let ms = skew(&self.com) * self.mass;
        blocks(&(Mat3::identity() * self.mass), &(-ms), &ms, &self.inertia_at_origin)
    }

    /// Same inertia with every entry multiplied by `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.mass * k, self.com, self.inertia_at_origin * k)
    }
}

/// Body-frame spatial momentum `h = M v`.
pub fn momentum(inertia: &SpatialInertia, v: &SpatialMotion) -> SpatialForce {
    let m = inertia.mass;
    let c = &inertia.com;
    SpatialForce {
        force: (v.linear - c.cross(&v.angular)) * m,
        moment: c.cross(&v.linear) * m + inertia.inertia_at_origin * v.angular,
    }
}

impl TryFrom<InertiaRepr> for SpatialInertia {
    type Error = Error;
    fn try_from(r: InertiaRepr) -> Result<Self> {
        let i = r.inertia_com;
        SpatialInertia::from_com(
            r.mass,
            Vec3::from(r.com),
            Mat3::new(i[0][0], i[0][1], i[0][2], i[1][0], i[1][1], i[1][2], i[2][0], i[2][1], i[2][2]),
        )
    }
}

impl From<SpatialInertia> for InertiaRepr {
    fn from(s: SpatialInertia) -> Self {
        let ic = s.inertia_at_com();
        InertiaRepr {
            mass: s.mass,
            com: [s.com.x, s.com.y, s.com.z],
            inertia_com: [
                [ic[(0, 0)], ic[(0, 1)], ic[(0, 2)]],
                [ic[(1, 0)], ic[(1, 1)], ic[(1, 2)]],
                [ic[(2, 0)], ic[(2, 1)], ic[(2, 2)]],
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::Vec6;
    use approx::assert_relative_eq;

    #[test]
    fn unit_point_symmetric_body_is_identity() {
        let i = SpatialInertia::new(1.0, Vec3::zeros(), Mat3::identity()).unwrap();
        assert_eq!(i.matrix(), Mat6::identity());
    }

    #[test]
    fn parallel_axis_case() {
        // -m S(c) S(c) with c = (0,1,0), m = 2 is diag(2, 0, 2)
        let i = SpatialInertia::from_com(2.0, Vec3::new(0.0, 1.0, 0.0), Mat3::identity()).unwrap();
        let expected = Mat3::from_diagonal(&Vec3::new(3.0, 1.0, 3.0));
        assert!((i.inertia_at_origin() - expected).amax() <= 1e-12);
    }

    #[test]
    fn momentum_cases() {
        let unit = SpatialInertia::new(1.0, Vec3::zeros(), Mat3::identity()).unwrap();
        assert_eq!(momentum(&unit, &SpatialMotion::zero()), SpatialForce::zero());
        let h = momentum(&unit, &SpatialMotion::new(Vec3::x(), Vec3::zeros()));
        assert_eq!(h, SpatialForce::new(Vec3::x(), Vec3::zeros()));

        let offset = SpatialInertia::from_com(1.0, Vec3::new(0.0, 1.0, 0.0), Mat3::identity()).unwrap();
        let v = SpatialMotion::new(Vec3::zeros(), Vec3::z());
        let h = momentum(&offset, &v);
        // independent route: assembled 6x6 times the stacked twist
        let oracle = offset.matrix() * Vec6::new(0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_relative_eq!(h.to_vector(), oracle, epsilon = 1e-15);
        assert_relative_eq!(h.force, Vec3::new(-1.0, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn rejects_invalid_inertia() {
        assert!(SpatialInertia::new(0.0, Vec3::zeros(), Mat3::identity()).is_err());
        assert!(SpatialInertia::new(1.0, Vec3::zeros(), -Mat3::identity()).is_err());
        let mut asym = Mat3::identity();
        asym[(0, 1)] = 0.1;
        assert!(SpatialInertia::new(1.0, Vec3::zeros(), asym).is_err());
    }

    #[test]
    fn serde_uses_com_inertia() {
        let i = SpatialInertia::solid_box(1.0, Vec3::new(0.3, 0.1, 0.05)).unwrap();
        let json = serde_json::to_string(&i).unwrap();
        let back: SpatialInertia = serde_json::from_str(&json).unwrap();
        assert_eq!(back, i);
    }
}
