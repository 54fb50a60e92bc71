//! Built-in two-link demo objects and loading of custom fixture files.
//!
//! Demo links are 1 kg uniform boxes of 0.30 x 0.10 x 0.05 m with their frame
//! at the box center. The joint frame sits on the parent's +x face and on the
//! child's -x face. Joints carry damping 0.1 and static friction 0.1; the
//! revolute range is [0, 95 deg] and the prismatic range [0, 0.15 m].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::excitation::{ComponentMask, DEFAULT_FREQUENCY_FLOOR};
use crate::model::{offset_frame, JointModel, JointSpec, LinkSpec, ObjectSpec, Topology};
use crate::spatial::{Pose, SpatialInertia, Vec3};

pub const DEMO_LINK_MASS: f64 = 1.0;
pub const DEMO_LINK_SIZE: [f64; 3] = [0.30, 0.10, 0.05];
pub const DEMO_DAMPING: f64 = 0.1;
pub const DEMO_STATIC_FRICTION: f64 = 0.1;
pub const DEMO_PRISMATIC_RANGE: f64 = 0.15;
pub const DEMO_REVOLUTE_RANGE_DEG: f64 = 95.0;

/// How trials on a fixture are excited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcitationSpec {
    pub active: ComponentMask,
    #[serde(default = "default_floor")]
    pub frequency_floor: f64,
    /// Redraw the exploration signal until the object moves, up to
    /// `max_attempts` draws per trial.
    #[serde(default)]
    pub require_motion: bool,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
}

fn default_floor() -> f64 {
    DEFAULT_FREQUENCY_FLOOR
}

fn default_attempts() -> u32 {
    64
}

/// An object, its true topology and its excitation protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub object: ObjectSpec,
    pub topology: Topology,
    pub excitation: ExcitationSpec,
    /// Joint positions at t = 0; mid-range when absent.
    #[serde(default)]
    pub initial_positions: Option<Vec<f64>>,
}

impl Fixture {
    pub fn validate(&self) -> Result<()> {
        self.object.validate()?;
        self.topology.check_against(&self.object)?;
        if self.excitation.active.is_empty() {
            return Err(Error::invalid(format!("fixture {}: empty excitation mask", self.name)));
        }
        if let Some(q0) = &self.initial_positions {
            if q0.len() != self.object.joint_count() {
                return Err(Error::invalid(format!(
                    "fixture {}: {} initial positions for {} joints",
                    self.name,
                    q0.len(),
                    self.object.joint_count()
                )));
            }
            for (j, q) in self.object.joints.iter().zip(q0) {
                if !j.within_limits(*q) {
                    return Err(Error::OutOfRange(format!(
                        "fixture {}: initial position {q} of joint {} outside limits",
                        self.name, j.index
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn initial_positions(&self) -> Vec<f64> {
        self.initial_positions
            .clone()
            .unwrap_or_else(|| self.object.default_positions())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let fx: Fixture = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        fx.validate()?;
        Ok(fx)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Resolves a built-in fixture name.
pub fn builtin(name: &str) -> Option<Fixture> {
    match name {
        "revolute-demo" => Some(revolute_demo()),
        "prismatic-demo" => Some(prismatic_demo()),
        "revolute-constrained" => Some(revolute_constrained()),
        "prismatic-constrained" => Some(prismatic_constrained()),
        _ => None,
    }
}

pub const BUILTIN_NAMES: [&str; 4] = [
    "revolute-demo",
    "prismatic-demo",
    "revolute-constrained",
    "prismatic-constrained",
];

fn demo_link(name: &str) -> LinkSpec {
    let [x, y, z] = DEMO_LINK_SIZE;
    LinkSpec {
        name: name.to_string(),
        inertia: SpatialInertia::solid_box(DEMO_LINK_MASS, Vec3::new(x, y, z))
            .expect("demo box inertia is valid"),
        is_handle: false,
    }
}

fn demo_object(name: &str, axis: Vec3, limits: [f64; 2]) -> ObjectSpec {
    let half = DEMO_LINK_SIZE[0] / 2.0;
    ObjectSpec {
        name: name.to_string(),
        links: vec![demo_link("link0"), demo_link("link1")],
        joints: vec![JointSpec {
            index: 1,
            parent_frame: offset_frame(half, 0.0, 0.0),
            child_frame: offset_frame(-half, 0.0, 0.0),
            axis,
            limits,
            damping: DEMO_DAMPING,
            static_friction: DEMO_STATIC_FRICTION,
        }],
        anchored_terminal: Some("link0".to_string()),
        base_pose: Pose::identity(),
    }
}

/// Scissors-like object lying flat: revolute joint about the vertical axis,
/// so gravity does no work on the joint. Excited by the tangential force
/// (body y) and the moment about the joint axis.
pub fn revolute_demo() -> Fixture {
    Fixture {
        name: "revolute-demo".into(),
        object: demo_object("revolute-object", Vec3::z(), [0.0, DEMO_REVOLUTE_RANGE_DEG.to_radians()]),
        topology: Topology::new(vec![JointModel::Revolute]),
        excitation: ExcitationSpec {
            active: ComponentMask::FY | ComponentMask::MZ,
            frequency_floor: DEFAULT_FREQUENCY_FLOOR,
            require_motion: true,
            max_attempts: default_attempts(),
        },
        initial_positions: None,
    }
}

/// Drawer-like object: prismatic joint along the horizontal link axis,
/// excited along that axis.
pub fn prismatic_demo() -> Fixture {
    Fixture {
        name: "prismatic-demo".into(),
        object: demo_object("prismatic-object", Vec3::x(), [0.0, DEMO_PRISMATIC_RANGE]),
        topology: Topology::new(vec![JointModel::Prismatic]),
        excitation: ExcitationSpec {
            active: ComponentMask::FX,
            frequency_floor: DEFAULT_FREQUENCY_FLOOR,
            require_motion: true,
            max_attempts: default_attempts(),
        },
        initial_positions: None,
    }
}

/// Revolute demo excited only in directions the joint cannot move in.
pub fn revolute_constrained() -> Fixture {
    let mut fx = revolute_demo();
    fx.name = "revolute-constrained".into();
    fx.excitation.active = ComponentMask::FZ | ComponentMask::MX | ComponentMask::MY;
    fx.excitation.require_motion = false;
    fx
}

/// Prismatic demo excited only in directions the joint cannot move in.
pub fn prismatic_constrained() -> Fixture {
    let mut fx = prismatic_demo();
    fx.name = "prismatic-constrained".into();
    fx.excitation.active = ComponentMask::FY
        | ComponentMask::FZ
        | ComponentMask::MX
        | ComponentMask::MY
        | ComponentMask::MZ;
    fx.excitation.require_motion = false;
    fx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_NAMES {
            builtin(name).unwrap().validate().unwrap();
        }
        assert!(builtin("door").is_none());
    }

    #[test]
    fn demo_parameters() {
        for fx in [revolute_demo(), prismatic_demo()] {
            let j = &fx.object.joints[0];
            assert_eq!(j.damping, 0.1);
            assert_eq!(j.static_friction, 0.1);
            assert_eq!(fx.object.links[0].inertia.mass(), 1.0);
        }
        assert_eq!(prismatic_demo().object.joints[0].limits, [0.0, 0.15]);
        assert!((revolute_demo().object.joints[0].limits[1] - 95f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn toml_round_trip() {
        let fx = revolute_demo();
        let text = fx.to_toml_string().unwrap();
        assert_eq!(Fixture::from_toml_str(&text).unwrap(), fx);
    }

    #[test]
    fn bad_axis_rejected_on_load() {
        let text = revolute_demo().to_toml_string().unwrap();
        let bad = text.replace("axis = [\n    0.0,\n    0.0,\n    1.0,\n]", "axis = [0.0, 0.0, 2.0]");
        assert_ne!(bad, text, "replacement target not found:\n{text}");
        assert!(Fixture::from_toml_str(&bad).is_err());
    }
}
