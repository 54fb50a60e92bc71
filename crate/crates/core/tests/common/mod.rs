#![allow(dead_code)]

use momentopo::fixtures::Fixture;
use momentopo::model::{offset_frame, JointModel, JointSpec, LinkSpec, ObjectSpec, Topology};
use momentopo::spatial::{Pose, SpatialInertia, Vec3};

pub fn frictionless(mut fx: Fixture) -> Fixture {
    for j in &mut fx.object.joints {
        j.static_friction = 0.0;
    }
    fx
}

pub fn wide_limits(mut fx: Fixture) -> Fixture {
    for j in &mut fx.object.joints {
        j.limits = [-3.0, 3.0];
    }
    fx
}

pub fn box_link(name: &str, mass: f64) -> LinkSpec {
    LinkSpec {
        name: name.into(),
        inertia: SpatialInertia::solid_box(mass, Vec3::new(0.30, 0.10, 0.05)).unwrap(),
        is_handle: false,
    }
}

/// Three boxes in a row along x, joined end to end, both joint axes along y.
pub fn three_link_chain(damping: f64, friction: f64) -> ObjectSpec {
    let joint = |index| JointSpec {
        index,
        parent_frame: offset_frame(0.15, 0.0, 0.0),
        child_frame: offset_frame(-0.15, 0.0, 0.0),
        axis: Vec3::y(),
        limits: [-3.0, 3.0],
        damping,
        static_friction: friction,
    };
    ObjectSpec {
        name: "three-link".into(),
        links: vec![box_link("a", 1.0), box_link("b", 0.5), box_link("c", 0.5)],
        joints: vec![joint(1), joint(2)],
        anchored_terminal: Some("a".into()),
        base_pose: Pose::identity(),
    }
}

pub fn topo(s: &str) -> Topology {
    s.parse().unwrap()
}

pub fn rev() -> Topology {
    Topology::new(vec![JointModel::Revolute])
}

pub fn pri() -> Topology {
    Topology::new(vec![JointModel::Prismatic])
}
