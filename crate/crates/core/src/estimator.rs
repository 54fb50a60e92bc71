//! Topology selection by momentum/wrench consistency.
//!
//! For every candidate topology the joint rates are recovered from the
//! recorded poses by projecting each measured relative twist onto the
//! hypothesized joint subspace. The link twists are then rebuilt from those
//! rates, summed into the inertial-frame system momentum, differentiated in
//! time and compared with the measured net wrench. The candidate whose
//! momentum rate best explains the wrench is selected.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{motion_subspace, JointModel, JointSpec, ObjectSpec, Topology};
use crate::spatial::{
    body_twist_from_poses, momentum, HomogeneousTransform, SpatialForce, SpatialMotion, Vec3,
};
use crate::trial::{TrialRecord, TrialSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Centered moving-average window applied to the momentum series before
    /// differentiation; odd, 1 disables smoothing.
    pub smoothing_window: usize,
    /// Samples dropped at each end of the residual sum.
    pub trim: usize,
    /// Absolute floor under which errors count as zero.
    pub eps_abs: f64,
    /// Minimum relative spread `(max - min) / max` between candidate errors
    /// for a conclusive selection.
    pub separation_threshold: f64,
    /// Minimum fraction of moving samples for a conclusive selection.
    pub min_motion_fraction: f64,
    /// Diagonal weights on `(fx, fy, fz, mx, my, mz)` inside the residual norm.
    pub weights: [f64; 6],
    /// Pass the net wrench through the same low-pass kernel that the twist
    /// and momentum differences apply to the momentum series, so impulsive
    /// events (joint stops, stick-slip) line up on both sides.
    pub matched_wrench_filter: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            smoothing_window: 5,
            trim: 2,
            eps_abs: 1e-6,
            separation_threshold: 0.1,
            min_motion_fraction: 0.05,
            weights: [1.0; 6],
            matched_wrench_filter: true,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.smoothing_window == 0 || self.smoothing_window.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "smoothing window must be odd and positive, got {}",
                self.smoothing_window
            )));
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("residual weights must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisError {
    pub topology: Topology,
    /// Sum of the per-sample residual norms.
    pub error: f64,
    #[serde(skip)]
    pub per_sample_residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub errors: Vec<HypothesisError>,
    pub selected: Topology,
    pub inconclusive: bool,
    pub motion_fraction: f64,
    /// Number of samples entering each error sum.
    pub aligned_samples: usize,
    /// Sum of `‖W‖` over the same samples.
    pub net_wrench_sum: f64,
}

impl EstimationReport {
    pub fn error_of(&self, topology: &Topology) -> Option<f64> {
        self.errors.iter().find(|e| &e.topology == topology).map(|e| e.error)
    }

    /// `error / (Σ‖W‖ + eps)`, comparable across trials.
    pub fn normalized_error(&self, topology: &Topology, eps: f64) -> Option<f64> {
        self.error_of(topology).map(|e| e / (self.net_wrench_sum + eps))
    }

    /// Runner-up error over best error; infinite when the best is zero.
    pub fn separation_ratio(&self) -> f64 {
        let mut sorted: Vec<f64> = self.errors.iter().map(|e| e.error).collect();
        sorted.sort_by(f64::total_cmp);
        match sorted.as_slice() {
            [best, second, ..] if *best > 0.0 => second / best,
            [_, _, ..] => f64::INFINITY,
            _ => 1.0,
        }
    }
}

/// Net wrench on the object in the inertial frame:
/// `W = -X*_left f_left - X*_right f_right + Σ X*_com,i m_i g`.
pub fn net_wrench(sample: &TrialSample, spec: &ObjectSpec, gravity: &Vec3) -> Result<SpatialForce> {
    if sample.poses.len() != spec.links.len() {
        return Err(Error::invalid(format!(
            "sample has {} poses, object has {} links",
            sample.poses.len(),
            spec.links.len()
        )));
    }
    let world: Vec<HomogeneousTransform> = sample.poses.iter().map(|p| p.to_homogeneous()).collect();
    Ok(net_wrench_from_transforms(&world, &sample.f_left, &sample.f_right, spec, gravity))
}

fn net_wrench_from_transforms(
    world: &[HomogeneousTransform],
    f_left: &SpatialForce,
    f_right: &SpatialForce,
    spec: &ObjectSpec,
    gravity: &Vec3,
) -> SpatialForce {
    let last = world.len() - 1;
    let mut w = -world[0].force_transform().apply(f_left) - world[last].force_transform().apply(f_right);
    for (link, h) in spec.links.iter().zip(world) {
        let inertia = &link.inertia;
        let com_frame = *h * HomogeneousTransform::from_translation(*inertia.com());
        let weight = SpatialForce::new(h.rotation().transpose().apply(gravity) * inertia.mass(), Vec3::zeros());
        w += com_frame.force_transform().apply(&weight);
    }
    w
}

/// Joint rate under `model` that best explains the measured relative motion
/// of `child` with respect to `parent`.
///
/// The relative twist `v_child - X_{child<-parent} v_parent` is expressed in
/// the joint frame and projected onto the model's motion subspace:
/// `q̇ = Sᵀ v_J / (Sᵀ S)`.
pub fn project_joint_rate(
    parent_pose: &HomogeneousTransform,
    child_pose: &HomogeneousTransform,
    parent_twist: &SpatialMotion,
    child_twist: &SpatialMotion,
    joint: &JointSpec,
    model: JointModel,
) -> Result<f64> {
    let s = motion_subspace(model, &joint.axis)?;
    let parent_in_child = child_pose.inverse() * *parent_pose;
    let relative = *child_twist - parent_in_child.motion_transform().apply(parent_twist);
    let in_joint = joint.child_frame.inverse().motion_transform().apply(&relative);
    let ss = s.linear.norm_squared() + s.angular.norm_squared();
    Ok((s.linear.dot(&in_joint.linear) + s.angular.dot(&in_joint.angular)) / ss)
}

/// Joint position under `model` read off the relative pose of two links.
pub fn project_joint_position(
    parent_pose: &HomogeneousTransform,
    child_pose: &HomogeneousTransform,
    joint: &JointSpec,
    model: JointModel,
) -> Result<f64> {
    let displacement = joint.parent_frame.inverse() * parent_pose.inverse() * *child_pose * joint.child_frame;
    Ok(match model {
        JointModel::Revolute => joint.axis.dot(&displacement.rotation().log()?),
        JointModel::Prismatic => joint.axis.dot(displacement.translation()),
    })
}

/// Per-joint rates for one sample under `topology`.
pub fn joint_rates(
    world: &[HomogeneousTransform],
    twists: &[SpatialMotion],
    spec: &ObjectSpec,
    topology: &Topology,
) -> Result<Vec<f64>> {
    spec.joints
        .iter()
        .map(|j| {
            let i = j.index;
            project_joint_rate(&world[i - 1], &world[i], &twists[i - 1], &twists[i], j, topology.model(i))
        })
        .collect()
}

/// Inertial-frame system momentum `Σ X*_i M_i v_i` with link twists rebuilt
/// from `base_twist` through `v_i = X_{i<-i-1} v_{i-1} + S_i q̇_i`.
pub fn hypothesized_momentum(
    world: &[HomogeneousTransform],
    base_twist: &SpatialMotion,
    spec: &ObjectSpec,
    topology: &Topology,
    rates: &[f64],
) -> Result<SpatialForce> {
    let mut v = *base_twist;
    let mut total = world[0].force_transform().apply(&momentum(&spec.links[0].inertia, &v));
    for j in &spec.joints {
        let i = j.index;
        let s = j
            .child_frame
            .motion_transform()
            .apply(&motion_subspace(topology.model(i), &j.axis)?);
        let parent_in_child = world[i].inverse() * world[i - 1];
        v = parent_in_child.motion_transform().apply(&v) + s * rates[i - 1];
        total += world[i].force_transform().apply(&momentum(&spec.links[i].inertia, &v));
    }
    Ok(total)
}

/// Time derivative of a uniformly sampled momentum series: optional centered
/// moving average of width `window`, then central differences inside and
/// second-order one-sided differences at the two ends.
pub fn momentum_rate(series: &[(f64, SpatialForce)], window: usize) -> Result<Vec<(f64, SpatialForce)>> {
    let n = series.len();
    if n < 3 {
        return Err(Error::invalid(format!("momentum rate needs at least 3 samples, got {n}")));
    }
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::invalid(format!("smoothing window must be odd and positive, got {window}")));
    }
    let dt = (series[n - 1].0 - series[0].0) / (n - 1) as f64;
    for pair in series.windows(2) {
        if ((pair[1].0 - pair[0].0) - dt).abs() > 1e-9 || !(dt > 0.0) {
            return Err(Error::invalid("momentum series is not uniformly sampled"));
        }
    }
    let values: Vec<SpatialForce> = series.iter().map(|(_, h)| *h).collect();
    let h = &moving_average(&values, window);
    let inv = 1.0 / (2.0 * dt);
    Ok((0..n)
        .map(|k| {
            let d = if k == 0 {
                (h[1] * 4.0 - h[0] * 3.0 - h[2]) * inv
            } else if k == n - 1 {
                (h[n - 1] * 3.0 - h[n - 2] * 4.0 + h[n - 3]) * inv
            } else {
                (h[k + 1] - h[k - 1]) * (1.0 / (series[k + 1].0 - series[k - 1].0))
            };
            (series[k].0, d)
        })
        .collect())
}

/// Centered moving average; the window shrinks symmetrically near the ends.
fn moving_average(values: &[SpatialForce], window: usize) -> Vec<SpatialForce> {
    let n = values.len();
    if window <= 1 {
        return values.to_vec();
    }
    let half = window / 2;
    (0..n)
        .map(|k| {
            let r = half.min(k).min(n - 1 - k);
            let mut acc = SpatialForce::zero();
            for v in &values[k - r..=k + r] {
                acc += *v;
            }
            acc * (1.0 / (2 * r + 1) as f64)
        })
        .collect()
}

/// Net wrench filtered like the estimated momentum rate: central-difference
/// twists followed by a central difference of momentum weight the step
/// accelerations `[1/4, 1/2, 1/4]`, and the moving average comes on top.
fn matched_wrench(net: &[SpatialForce], window: usize) -> Vec<SpatialForce> {
    let n = net.len();
    let kernel: Vec<SpatialForce> = (0..n)
        .map(|k| {
            if k == 0 || k == n - 1 {
                net[k]
            } else {
                (net[k - 1] + net[k] * 2.0 + net[k + 1]) * 0.25
            }
        })
        .collect();
    moving_average(&kernel, window)
}

/// Everything about a record that does not depend on the hypothesis.
struct RecordKinematics {
    times: Vec<f64>,
    world: Vec<Vec<HomogeneousTransform>>,
    twists: Vec<Vec<SpatialMotion>>,
    net: Vec<SpatialForce>,
    motion_fraction: f64,
}

impl RecordKinematics {
    fn new(record: &TrialRecord, spec: &ObjectSpec) -> Result<Self> {
        record.validate()?;
        spec.validate()?;
        let n = record.samples.len();
        if record.metadata.link_count != spec.links.len() {
            return Err(Error::invalid(format!(
                "record has {} links, object has {}",
                record.metadata.link_count,
                spec.links.len()
            )));
        }
        let gravity = record.metadata.gravity;
        let world: Vec<Vec<HomogeneousTransform>> = record
            .samples
            .iter()
            .map(|s| s.poses.iter().map(|p| p.to_homogeneous()).collect())
            .collect();
        let mut twists = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = match k {
                0 => (0, 1),
                _ if k == n - 1 => (n - 2, n - 1),
                _ => (k - 1, k + 1),
            };
            let (sa, sb) = (&record.samples[a], &record.samples[b]);
            let dt = sb.t - sa.t;
            twists.push(
                sa.poses
                    .iter()
                    .zip(&sb.poses)
                    .map(|(pa, pb)| body_twist_from_poses(pa, pb, dt))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let net = record
            .samples
            .iter()
            .zip(&world)
            .map(|(s, w)| net_wrench_from_transforms(w, &s.f_left, &s.f_right, spec, &gravity))
            .collect();
        Ok(RecordKinematics {
            times: record.samples.iter().map(|s| s.t).collect(),
            world,
            twists,
            net,
            motion_fraction: record.motion_fraction(),
        })
    }

    fn aligned(&self, cfg: &EstimatorConfig) -> Result<std::ops::Range<usize>> {
        let n = self.times.len();
        if n < 3 || n <= 2 * cfg.trim {
            return Err(Error::invalid(format!(
                "{n} samples leave nothing to compare after trimming {} per side",
                cfg.trim
            )));
        }
        Ok(cfg.trim..n - cfg.trim)
    }

    fn evaluate(&self, spec: &ObjectSpec, topology: &Topology, cfg: &EstimatorConfig) -> Result<HypothesisError> {
        topology.check_against(spec)?;
        let range = self.aligned(cfg)?;
        let mut series = Vec::with_capacity(self.times.len());
        for k in 0..self.times.len() {
            let rates = joint_rates(&self.world[k], &self.twists[k], spec, topology)?;
            let h = hypothesized_momentum(&self.world[k], &self.twists[k][0], spec, topology, &rates)?;
            series.push((self.times[k], h));
        }
        let rate = momentum_rate(&series, cfg.smoothing_window)?;
        let filtered;
        let net = if cfg.matched_wrench_filter {
            filtered = matched_wrench(&self.net, cfg.smoothing_window);
            &filtered
        } else {
            &self.net
        };
        let residuals: Vec<f64> = range
            .map(|k| {
                let r = (net[k] - rate[k].1).to_array();
                r.iter()
                    .zip(&cfg.weights)
                    .map(|(v, w)| (v * w) * (v * w))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        Ok(HypothesisError {
            topology: topology.clone(),
            error: residuals.iter().sum(),
            per_sample_residuals: residuals,
        })
    }
}

/// Hypothesis error `Σ ‖W - ḣ‖` of one candidate over a recorded trial.
pub fn hypothesis_error(
    record: &TrialRecord,
    spec: &ObjectSpec,
    topology: &Topology,
    cfg: &EstimatorConfig,
) -> Result<HypothesisError> {
    cfg.validate()?;
    RecordKinematics::new(record, spec)?.evaluate(spec, topology, cfg)
}

/// Scores every candidate and selects the one with the smallest error; ties
/// go to the lexicographically smallest topology.
pub fn select_topology(
    record: &TrialRecord,
    spec: &ObjectSpec,
    candidates: &[Topology],
    cfg: &EstimatorConfig,
) -> Result<EstimationReport> {
    cfg.validate()?;
    if candidates.is_empty() {
        return Err(Error::invalid("no candidate topologies"));
    }
    let kin = RecordKinematics::new(record, spec)?;
    let errors = candidates
        .par_iter()
        .map(|t| kin.evaluate(spec, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    let best = errors
        .iter()
        .min_by(|a, b| a.error.total_cmp(&b.error).then_with(|| a.topology.cmp(&b.topology)))
        .expect("candidates is nonempty");
    let max = errors.iter().map(|e| e.error).fold(f64::MIN, f64::max);
    let spread = (max - best.error) / max.max(cfg.eps_abs);
    let range = kin.aligned(cfg)?;
    let net_wrench_sum = kin.net[range.clone()].iter().map(|w| w.norm()).sum();
    Ok(EstimationReport {
        selected: best.topology.clone(),
        inconclusive: spread < cfg.separation_threshold || kin.motion_fraction < cfg.min_motion_fraction,
        motion_fraction: kin.motion_fraction,
        aligned_samples: range.len(),
        net_wrench_sum,
        errors,
    })
}

/// Candidates for an object: all `2^n` topologies, or the single empty
/// topology for a lone rigid body.
pub fn candidate_topologies(spec: &ObjectSpec) -> Result<Vec<Topology>> {
    match spec.joint_count() {
        0 => Ok(vec![Topology::empty()]),
        n => crate::model::enumerate_topologies(n),
    }
}

/// Inertial-frame momentum computed from the measured twists directly, with
/// no joint model involved.
pub fn measured_momentum(world: &[HomogeneousTransform], twists: &[SpatialMotion], spec: &ObjectSpec) -> SpatialForce {
    spec.links
        .iter()
        .zip(world.iter().zip(twists))
        .map(|(l, (h, v))| h.force_transform().apply(&momentum(&l.inertia, v)))
        .fold(SpatialForce::zero(), |a, b| a + b)
}
