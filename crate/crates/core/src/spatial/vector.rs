use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::{Vec3, Vec6};

/// Twist: `(linear; angular)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpatialMotion {
    pub linear: Vec3,
    pub angular: Vec3,
}

/// Wrench or momentum: `(force; moment)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpatialForce {
    pub force: Vec3,
    pub moment: Vec3,
}

impl SpatialMotion {
    pub fn new(linear: Vec3, angular: Vec3) -> Self {
        SpatialMotion { linear, angular }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vec6) -> Self {
        SpatialMotion {
            linear: v.fixed_rows::<3>(0).into_owned(),
            angular: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vec6 {
        let mut v = Vec6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.linear);
        v.fixed_rows_mut::<3>(3).copy_from(&self.angular);
        v
    }

    /// Motion cross product `self ×m other`.
    pub fn cross_motion(&self, other: &SpatialMotion) -> SpatialMotion {
        SpatialMotion {
            linear: self.angular.cross(&other.linear) + self.linear.cross(&other.angular),
            angular: self.angular.cross(&other.angular),
        }
    }

    /// Force cross product `self ×* f`.
    pub fn cross_force(&self, f: &SpatialForce) -> SpatialForce {
        SpatialForce {
            force: self.angular.cross(&f.force),
            moment: self.angular.cross(&f.moment) + self.linear.cross(&f.force),
        }
    }

    /// Power pairing `fᵀ v`.
    pub fn dot(&self, f: &SpatialForce) -> f64 {
        self.linear.dot(&f.force) + self.angular.dot(&f.moment)
    }

    pub fn norm(&self) -> f64 {
        (self.linear.norm_squared() + self.angular.norm_squared()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.linear.iter().chain(self.angular.iter()).all(|v| v.is_finite())
    }
}

impl SpatialForce {
    pub fn new(force: Vec3, moment: Vec3) -> Self {
        SpatialForce { force, moment }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vec6) -> Self {
        SpatialForce {
            force: v.fixed_rows::<3>(0).into_owned(),
            moment: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        SpatialForce {
            force: Vec3::new(a[0], a[1], a[2]),
            moment: Vec3::new(a[3], a[4], a[5]),
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.force.x,
            self.force.y,
            self.force.z,
            self.moment.x,
            self.moment.y,
            self.moment.z,
        ]
    }

    pub fn to_vector(&self) -> Vec6 {
        Vec6::from(self.to_array())
    }

    pub fn norm(&self) -> f64 {
        (self.force.norm_squared() + self.moment.norm_squared()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().chain(self.moment.iter()).all(|v| v.is_finite())
    }
}

macro_rules! linear_ops {
    ($t:ident, $a:ident, $b:ident) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, r: $t) -> $t {
                $t {
                    $a: self.$a + r.$a,
                    $b: self.$b + r.$b,
                }
            }
        }
        impl AddAssign for $t {
            fn add_assign(&mut self, r: $t) {
                self.$a += r.$a;
                self.$b += r.$b;
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, r: $t) -> $t {
                $t {
                    $a: self.$a - r.$a,
                    $b: self.$b - r.$b,
                }
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                $t {
                    $a: -self.$a,
                    $b: -self.$b,
                }
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t {
                $t {
                    $a: self.$a * s,
                    $b: self.$b * s,
                }
            }
        }
    };
}

linear_ops!(SpatialMotion, linear, angular);
linear_ops!(SpatialForce, force, moment);
