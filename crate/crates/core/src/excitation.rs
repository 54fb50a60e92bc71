//! Random sinusoidal exploration wrenches.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::SpatialForce;

pub const MAX_AMPLITUDE: f64 = 0.2;
pub const MAX_FREQUENCY: f64 = 0.3;
pub const DEFAULT_FREQUENCY_FLOOR: f64 = 0.05;

/// Subset of the six wrench components, bit `k` for component `k` in
/// `(fx, fy, fz, mx, my, mz)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentMask(pub u8);

impl ComponentMask {
    pub const FX: ComponentMask = ComponentMask(1 << 0);
    pub const FY: ComponentMask = ComponentMask(1 << 1);
    pub const FZ: ComponentMask = ComponentMask(1 << 2);
    pub const MX: ComponentMask = ComponentMask(1 << 3);
    pub const MY: ComponentMask = ComponentMask(1 << 4);
    pub const MZ: ComponentMask = ComponentMask(1 << 5);
    pub const ALL: ComponentMask = ComponentMask(0b11_1111);

    pub fn contains(self, k: usize) -> bool {
        k < 6 && self.0 >> k & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 & Self::ALL.0 == 0
    }

    pub fn union(self, other: ComponentMask) -> ComponentMask {
        ComponentMask(self.0 | other.0)
    }
}

impl std::ops::BitOr for ComponentMask {
    type Output = ComponentMask;
    fn bitor(self, rhs: ComponentMask) -> ComponentMask {
        self.union(rhs)
    }
}

/// Per-component amplitude and frequency of `A_k sin(2π f_k t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidSpec {
    pub amplitude: [f64; 6],
    pub frequency: [f64; 6],
    pub active: ComponentMask,
}

impl SinusoidSpec {
    pub fn zero() -> Self {
        SinusoidSpec {
            amplitude: [0.0; 6],
            frequency: [0.0; 6],
            active: ComponentMask::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..6 {
            let (a, f) = (self.amplitude[k], self.frequency[k]);
            if !(a.abs() <= MAX_AMPLITUDE) || !(0.0..=MAX_FREQUENCY).contains(&f) {
                return Err(Error::invalid(format!(
                    "component {k}: amplitude {a} or frequency {f} outside the exploration range"
                )));
            }
        }
        Ok(())
    }

    /// Wrench at time `t`, component `k` equal to `A_k sin(2π f_k t)`.
    pub fn evaluate(&self, t: f64) -> SpatialForce {
        let mut out = [0.0; 6];
        for (k, v) in out.iter_mut().enumerate() {
            if self.amplitude[k] != 0.0 {
                *v = self.amplitude[k] * (2.0 * PI * self.frequency[k] * t).sin();
            }
        }
        SpatialForce::from_array(out)
    }
}

/// Draws amplitudes from `U[-0.2, 0.2]` and frequencies from
/// `U[frequency_floor, 0.3]` for every active component; inactive components
/// are zero. Draw order is amplitude then frequency, component by component.
pub fn sample_sinusoid<R: Rng + ?Sized>(
    rng: &mut R,
    active: ComponentMask,
    frequency_floor: f64,
) -> Result<SinusoidSpec> {
    if active.is_empty() {
        return Err(Error::invalid("exploration mask selects no wrench component"));
    }
    if !(0.0..=MAX_FREQUENCY).contains(&frequency_floor) {
        return Err(Error::invalid(format!("frequency floor {frequency_floor} outside [0, 0.3]")));
    }
    let mut spec = SinusoidSpec::zero();
    spec.active = active;
    for k in 0..6 {
        if active.contains(k) {
            spec.amplitude[k] = rng.random_range(-MAX_AMPLITUDE..=MAX_AMPLITUDE);
            spec.frequency[k] = rng.random_range(frequency_floor..=MAX_FREQUENCY);
        }
    }
    Ok(spec)
}
