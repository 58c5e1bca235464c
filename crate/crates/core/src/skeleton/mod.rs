//! Skeleton frames, joint layouts and dataset ingestion.

mod msr;
mod split;
mod stream;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use msr::{
    load_allowlist, load_msr_dataset, load_msr_skeleton, parse_msr_file_name, parse_msr_skeleton, write_msr_skeleton,
    MsrDataset, MSR_ACTION3D_CLASSES,
};
pub use split::{make_split, Fold, SplitKind};
pub use stream::{
    load_sidecar, load_stream, merge_instances, parse_sidecar, parse_stream, validate_sidecar, write_sidecar,
    write_stream, GroundTruthSegment, IdleSource,
};

/// A single 3D joint sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Joint3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub confidence: Option<f64>,
}

impl Joint3D {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self {
            x,
            y,
            z,
            confidence: None,
        }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = Some(confidence);
        self
    }

    /// Null joints (all-zero coordinates) and non-finite samples carry no
    /// position information.
    pub fn is_null(&self) -> bool {
        !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite())
            || (self.x == 0.0 && self.y == 0.0 && self.z == 0.0)
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// One time step of a skeleton together with per-joint validity.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonFrame {
    pub index: usize,
    pub joints: Vec<Joint3D>,
    pub valid: Vec<bool>,
}

impl SkeletonFrame {
    /// Builds a frame and derives validity from the joint samples.
    pub fn new(index: usize, joints: Vec<Joint3D>) -> Self {
        let valid = joints.iter().map(|j| !j.is_null()).collect();
        Self { index, joints, valid }
    }

    pub fn joint_count(&self) -> usize {
        self.joints.len()
    }

    pub fn invalid_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }

    pub fn all_valid(&self) -> bool {
        self.valid.iter().all(|v| *v)
    }

    /// Position of a joint, or `None` when the joint is flagged invalid.
    pub fn position(&self, joint: usize) -> Option<[f64; 3]> {
        match self.valid.get(joint) {
            Some(true) => Some(self.joints[joint].position()),
            _ => None,
        }
    }
}

/// A pre-segmented gesture recording.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureInstance {
    pub frames: Vec<SkeletonFrame>,
    pub label: u32,
    pub subject: u32,
    pub episode: u32,
}

impl GestureInstance {
    pub fn new(frames: Vec<SkeletonFrame>, label: u32, subject: u32, episode: u32) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::input(format!(
                "gesture a{label:02}_s{subject:02}_e{episode:02} has no frames"
            )));
        }
        if frames.windows(2).any(|w| w[1].index <= w[0].index) {
            return Err(Error::input("frame indices must be strictly increasing"));
        }
        let joints = frames[0].joint_count();
        if frames.iter().any(|f| f.joint_count() != joints) {
            return Err(Error::input("frames disagree on joint count"));
        }
        Ok(Self {
            frames,
            label,
            subject,
            episode,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Applies [`StreamRepair`] to the whole recording.
    ///
    /// Fails when no frame survives repair.
    pub fn repaired(&self) -> Result<GestureInstance> {
        let mut repair = StreamRepair::default();
        let frames: Vec<_> = self.frames.iter().filter_map(|f| repair.repair(f)).collect();
        if frames.is_empty() {
            return Err(Error::input(format!(
                "gesture a{:02}_s{:02}_e{:02} has no usable frames after repair",
                self.label, self.subject, self.episode
            )));
        }
        GestureInstance::new(frames, self.label, self.subject, self.episode)
    }
}

/// Causal null-joint repair.
///
/// Frames with more than half of their joints invalid are dropped. Isolated
/// invalid joints take the last valid position seen for that joint; frames
/// where some joint has no valid history yet are dropped as well.
#[derive(Debug, Clone, Default)]
pub struct StreamRepair {
    last: Vec<Option<Joint3D>>,
}

impl StreamRepair {
    pub fn repair(&mut self, frame: &SkeletonFrame) -> Option<SkeletonFrame> {
        let n = frame.joint_count();
        if self.last.len() != n {
            self.last = vec![None; n];
        }
        if frame.invalid_count() * 2 > n {
            return None;
        }
        let mut out = frame.clone();
        let mut complete = true;
        for j in 0..n {
            if frame.valid[j] {
                self.last[j] = Some(frame.joints[j]);
            } else if let Some(held) = self.last[j] {
                out.joints[j] = held;
                out.valid[j] = true;
            } else {
                complete = false;
            }
        }
        complete.then_some(out)
    }

    pub fn reset(&mut self) {
        self.last.clear();
    }
}

/// Named joint roles of a Kinect-v1 class skeleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum JointRole {
    HipCenter,
    Spine,
    ShoulderCenter,
    Head,
    ShoulderLeft,
    ElbowLeft,
    WristLeft,
    HandLeft,
    ShoulderRight,
    ElbowRight,
    WristRight,
    HandRight,
    HipLeft,
    KneeLeft,
    AnkleLeft,
    FootLeft,
    HipRight,
    KneeRight,
    AnkleRight,
    FootRight,
}

impl JointRole {
    /// Roles in Kinect SDK enumeration order.
    pub const ALL: [JointRole; 20] = [
        JointRole::HipCenter,
        JointRole::Spine,
        JointRole::ShoulderCenter,
        JointRole::Head,
        JointRole::ShoulderLeft,
        JointRole::ElbowLeft,
        JointRole::WristLeft,
        JointRole::HandLeft,
        JointRole::ShoulderRight,
        JointRole::ElbowRight,
        JointRole::WristRight,
        JointRole::HandRight,
        JointRole::HipLeft,
        JointRole::KneeLeft,
        JointRole::AnkleLeft,
        JointRole::FootLeft,
        JointRole::HipRight,
        JointRole::KneeRight,
        JointRole::AnkleRight,
        JointRole::FootRight,
    ];

    /// Joints feeding the first classification stage.
    pub const GLOBAL: [JointRole; 5] = [
        JointRole::Head,
        JointRole::HandLeft,
        JointRole::HandRight,
        JointRole::FootLeft,
        JointRole::FootRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            JointRole::HipCenter => "hip_center",
            JointRole::Spine => "spine",
            JointRole::ShoulderCenter => "shoulder_center",
            JointRole::Head => "head",
            JointRole::ShoulderLeft => "shoulder_left",
            JointRole::ElbowLeft => "elbow_left",
            JointRole::WristLeft => "wrist_left",
            JointRole::HandLeft => "hand_left",
            JointRole::ShoulderRight => "shoulder_right",
            JointRole::ElbowRight => "elbow_right",
            JointRole::WristRight => "wrist_right",
            JointRole::HandRight => "hand_right",
            JointRole::HipLeft => "hip_left",
            JointRole::KneeLeft => "knee_left",
            JointRole::AnkleLeft => "ankle_left",
            JointRole::FootLeft => "foot_left",
            JointRole::HipRight => "hip_right",
            JointRole::KneeRight => "knee_right",
            JointRole::AnkleRight => "ankle_right",
            JointRole::FootRight => "foot_right",
        }
    }
}

impl fmt::Display for JointRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JointRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        JointRole::ALL
            .iter()
            .copied()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::input(format!("unknown joint role `{s}`")))
    }
}

/// Joint layout of a skeleton source: which array slot holds which role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonDescriptor {
    name: String,
    layout: Vec<JointRole>,
    reference: usize,
    global: Vec<usize>,
}

impl SkeletonDescriptor {
    pub fn new(name: impl Into<String>, layout: Vec<JointRole>, reference: JointRole) -> Result<Self> {
        let mut seen = layout.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != layout.len() {
            return Err(Error::input("descriptor lists a joint role twice"));
        }
        let reference = layout
            .iter()
            .position(|r| *r == reference)
            .ok_or_else(|| Error::input(format!("reference joint {reference} not in layout")))?;
        let mut d = Self {
            name: name.into(),
            layout,
            reference,
            global: Vec::new(),
        };
        d.global = d.indices_of(&JointRole::GLOBAL)?;
        Ok(d)
    }

    /// Replaces the reference joint and the global joint subset.
    pub fn with_subsets(mut self, reference: JointRole, global: &[JointRole]) -> Result<Self> {
        if global.is_empty() {
            return Err(Error::input("global joint subset is empty"));
        }
        let mut seen = global.to_vec();
        seen.sort();
        seen.dedup();
        if seen.len() != global.len() {
            return Err(Error::input("global joint subset lists a joint twice"));
        }
        self.reference = self.index_of(reference)?;
        self.global = self.indices_of(global)?;
        Ok(self)
    }

    /// Kinect SDK v1 ordering, used by the generic stream format.
    pub fn kinect_sdk() -> Self {
        Self::new("kinect-sdk", JointRole::ALL.to_vec(), JointRole::HipCenter).expect("static layout")
    }

    /// Joint ordering of the MSRAction3D `skeleton3D` files.
    pub fn msr_action3d() -> Self {
        use JointRole::*;
        let layout = vec![
            ShoulderLeft,
            ShoulderRight,
            ShoulderCenter,
            Spine,
            HipLeft,
            HipRight,
            HipCenter,
            ElbowLeft,
            ElbowRight,
            WristLeft,
            WristRight,
            HandLeft,
            HandRight,
            KneeLeft,
            KneeRight,
            AnkleLeft,
            AnkleRight,
            FootLeft,
            FootRight,
            Head,
        ];
        Self::new("msr-action3d", layout, HipCenter).expect("static layout")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "kinect-sdk" => Ok(Self::kinect_sdk()),
            "msr-action3d" => Ok(Self::msr_action3d()),
            other => Err(Error::input(format!("unknown skeleton descriptor `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn joint_count(&self) -> usize {
        self.layout.len()
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    pub fn role(&self, index: usize) -> Option<JointRole> {
        self.layout.get(index).copied()
    }

    pub fn index_of(&self, role: JointRole) -> Result<usize> {
        self.layout
            .iter()
            .position(|r| *r == role)
            .ok_or_else(|| Error::input(format!("descriptor `{}` has no {role}", self.name)))
    }

    pub fn indices_of(&self, roles: &[JointRole]) -> Result<Vec<usize>> {
        roles.iter().map(|r| self.index_of(*r)).collect()
    }

    pub fn reference_role(&self) -> JointRole {
        self.layout[self.reference]
    }

    /// Indices of the stage-one joints; head, hands and feet unless replaced.
    pub fn global_joints(&self) -> Vec<usize> {
        self.global.clone()
    }

    pub fn global_roles(&self) -> Vec<JointRole> {
        self.global.iter().map(|&i| self.layout[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(index: usize, coords: &[[f64; 3]]) -> SkeletonFrame {
        SkeletonFrame::new(index, coords.iter().map(|c| Joint3D::new(c[0], c[1], c[2])).collect())
    }

    #[test]
    fn null_and_non_finite_joints_are_invalid() {
        assert!(Joint3D::new(0.0, 0.0, 0.0).is_null());
        assert!(Joint3D::new(f64::NAN, 1.0, 1.0).is_null());
        assert!(Joint3D::new(1.0, f64::INFINITY, 1.0).is_null());
        assert!(!Joint3D::new(0.0, 0.0, 1e-9).is_null());
    }

    #[test]
    fn repair_holds_last_valid_position() {
        let mut repair = StreamRepair::default();
        let a = repair.repair(&frame(0, &[[1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [3.0, 3.0, 3.0]]));
        assert!(a.is_some());
        let b = repair
            .repair(&frame(1, &[[1.5, 1.0, 1.0], [0.0, 0.0, 0.0], [3.0, 3.0, 3.0]]))
            .unwrap();
        assert!(b.all_valid());
        assert_eq!(b.joints[1].position(), [2.0, 2.0, 2.0]);
    }

    #[test]
    fn repair_drops_mostly_invalid_frames_and_unseeded_joints() {
        let mut repair = StreamRepair::default();
        let mostly_null = frame(0, &[[0.0; 3], [0.0; 3], [1.0, 1.0, 1.0]]);
        assert!(repair.repair(&mostly_null).is_none());
        let unseeded = frame(1, &[[1.0, 1.0, 1.0], [0.0; 3], [1.0, 1.0, 1.0]]);
        assert!(repair.repair(&unseeded).is_none());
        let full = frame(2, &[[1.0, 1.0, 1.0], [2.0, 1.0, 1.0], [1.0, 1.0, 1.0]]);
        assert!(repair.repair(&full).is_some());
    }

    #[test]
    fn instance_rejects_non_increasing_indices() {
        let f = frame(3, &[[1.0, 1.0, 1.0]]);
        assert!(GestureInstance::new(vec![f.clone(), f], 1, 1, 1).is_err());
        assert!(GestureInstance::new(vec![], 1, 1, 1).is_err());
    }

    #[test]
    fn descriptors_resolve_global_joints() {
        for d in [SkeletonDescriptor::kinect_sdk(), SkeletonDescriptor::msr_action3d()] {
            assert_eq!(d.joint_count(), 20);
            assert_eq!(d.global_joints().len(), 5);
            assert_eq!(d.role(d.reference()), Some(JointRole::HipCenter));
        }
        assert_eq!(
            SkeletonDescriptor::msr_action3d().index_of(JointRole::Head).unwrap(),
            19
        );
    }

    #[test]
    fn role_names_round_trip() {
        for role in JointRole::ALL {
            assert_eq!(role.name().parse::<JointRole>().unwrap(), role);
        }
    }
}
