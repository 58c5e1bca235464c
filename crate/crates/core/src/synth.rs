//! Synthetic skeleton gestures for tests, demos and benchmarks.
//!
//! A gesture moves one or more limbs through a list of keypoints. Every
//! gesture of the same limb starts with the same raise to a ready pose, then
//! strokes through its own keypoints and lowers back to rest. Subjects vary
//! in body scale, position, amplitude and speed; every joint gets Gaussian
//! noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::skeleton::{GestureInstance, Joint3D, JointRole, SkeletonDescriptor, SkeletonFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limb {
    RightArm,
    LeftArm,
    RightLeg,
    LeftLeg,
}

impl Limb {
    /// Root, middle, distal and end joint of the chain.
    fn chain(self) -> [JointRole; 4] {
        use JointRole::*;
        match self {
            Limb::RightArm => [ShoulderRight, ElbowRight, WristRight, HandRight],
            Limb::LeftArm => [ShoulderLeft, ElbowLeft, WristLeft, HandLeft],
            Limb::RightLeg => [HipRight, KneeRight, AnkleRight, FootRight],
            Limb::LeftLeg => [HipLeft, KneeLeft, AnkleLeft, FootLeft],
        }
    }

    fn is_arm(self) -> bool {
        matches!(self, Limb::RightArm | Limb::LeftArm)
    }

    fn side(self) -> f64 {
        match self {
            Limb::RightArm | Limb::RightLeg => 1.0,
            Limb::LeftArm | Limb::LeftLeg => -1.0,
        }
    }

    /// End-effector offset from the limb root at rest.
    fn rest(self) -> [f64; 3] {
        if self.is_arm() {
            [0.07 * self.side(), -0.57, 0.0]
        } else {
            [0.02 * self.side(), -0.9, -0.08]
        }
    }

    /// Shared pose every stroke of this limb starts from.
    fn ready(self) -> [f64; 3] {
        if self.is_arm() {
            [0.05 * self.side(), -0.05, -0.35]
        } else {
            [0.0, -0.7, -0.2]
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GestureSpec {
    pub name: &'static str,
    /// End-effector keypoints relative to the limb root, for the right side.
    /// Left limbs mirror x.
    pub strokes: Vec<(Limb, Vec<[f64; 3]>)>,
}

fn mirror(points: &[[f64; 3]]) -> Vec<[f64; 3]> {
    points.iter().map(|p| [-p[0], p[1], p[2]]).collect()
}

/// The 20 built-in gestures: right-arm strokes first, then left arm, both
/// arms and legs.
pub fn catalog() -> Vec<GestureSpec> {
    let swipe_right = vec![[-0.2, 0.0, -0.35], [0.45, 0.0, -0.3]];
    let swipe_up = vec![[0.1, -0.3, -0.35], [0.1, 0.45, -0.3]];
    let swipe_left = vec![[0.45, 0.0, -0.3], [-0.2, 0.0, -0.35]];
    let swipe_down = vec![[0.1, 0.45, -0.3], [0.1, -0.3, -0.35]];
    let push = vec![[0.1, 0.0, -0.15], [0.1, 0.0, -0.6]];
    let circle = vec![
        [0.1, 0.25, -0.4],
        [0.35, 0.0, -0.4],
        [0.1, -0.25, -0.4],
        [-0.15, 0.0, -0.4],
        [0.1, 0.25, -0.4],
    ];
    let kick = vec![[0.0, -0.65, -0.55]];
    let side = vec![[0.45, -0.75, -0.05]];

    use Limb::*;
    let one = |name, limb, pts: &Vec<[f64; 3]>| GestureSpec {
        name,
        strokes: vec![(limb, pts.clone())],
    };
    let two = |name, pts: &Vec<[f64; 3]>| GestureSpec {
        name,
        strokes: vec![(RightArm, pts.clone()), (LeftArm, mirror(pts))],
    };
    vec![
        one("swipe_right", RightArm, &swipe_right),
        one("swipe_up", RightArm, &swipe_up),
        one("swipe_left", RightArm, &swipe_left),
        one("swipe_down", RightArm, &swipe_down),
        one("push", RightArm, &push),
        one("circle", RightArm, &circle),
        one(
            "diagonal_up_right",
            RightArm,
            &vec![[-0.1, -0.2, -0.35], [0.4, 0.4, -0.3]],
        ),
        one(
            "diagonal_up_left",
            RightArm,
            &vec![[0.4, -0.2, -0.35], [-0.1, 0.4, -0.3]],
        ),
        one(
            "diagonal_down_right",
            RightArm,
            &vec![[-0.1, 0.4, -0.3], [0.4, -0.2, -0.35]],
        ),
        one(
            "diagonal_down_left",
            RightArm,
            &vec![[0.4, 0.4, -0.3], [-0.1, -0.2, -0.35]],
        ),
        one("left_swipe_left", LeftArm, &mirror(&swipe_right)),
        one("left_swipe_up", LeftArm, &mirror(&swipe_up)),
        one("left_push", LeftArm, &mirror(&push)),
        one("left_circle", LeftArm, &mirror(&circle)),
        two("both_raise", &swipe_up),
        two("both_push", &push),
        one("right_kick", RightLeg, &kick),
        one("right_side_step", RightLeg, &side),
        one("left_kick", LeftLeg, &mirror(&kick)),
        one("left_side_step", LeftLeg, &mirror(&side)),
    ]
}

/// Per-performer variation.
#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    pub scale: f64,
    pub translation: [f64; 3],
    pub amplitude: f64,
    pub speed: f64,
    /// Standard deviation of per-joint noise, metres.
    pub noise: f64,
}

impl Subject {
    pub fn nominal() -> Self {
        Self {
            scale: 1.0,
            translation: [0.0; 3],
            amplitude: 1.0,
            speed: 1.0,
            noise: 0.003,
        }
    }

    pub fn sample(rng: &mut impl Rng) -> Self {
        Self {
            scale: rng.random_range(0.9..1.1),
            translation: [
                rng.random_range(-0.2..0.2),
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.2..0.2),
            ],
            amplitude: rng.random_range(0.85..1.15),
            speed: rng.random_range(0.85..1.15),
            noise: 0.003,
        }
    }
}

const REST_FRAMES: usize = 3;
const RAISE_FRAMES: usize = 8;
const STROKE_FRAMES: usize = 7;
const LOWER_FRAMES: usize = 8;

fn rest_positions() -> Vec<(JointRole, [f64; 3])> {
    use JointRole::*;
    let z = 2.5;
    let mut out = vec![
        (HipCenter, [0.0, 1.0, z]),
        (Spine, [0.0, 1.2, z]),
        (ShoulderCenter, [0.0, 1.45, z]),
        (Head, [0.0, 1.65, z]),
    ];
    for limb in [Limb::RightArm, Limb::LeftArm, Limb::RightLeg, Limb::LeftLeg] {
        let root = if limb.is_arm() {
            [0.18 * limb.side(), 1.42, z]
        } else {
            [0.1 * limb.side(), 0.95, z]
        };
        let end = add(root, limb.rest());
        let [r, m, d, e] = limb.chain();
        let (mid, distal) = limb_joints(limb, root, end);
        out.extend([(r, root), (m, mid), (d, distal), (e, end)]);
    }
    out
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn lerp(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    [
        a[0] + (b[0] - a[0]) * s,
        a[1] + (b[1] - a[1]) * s,
        a[2] + (b[2] - a[2]) * s,
    ]
}

/// Middle and distal joint positions for a root / end-effector pair.
fn limb_joints(limb: Limb, root: [f64; 3], end: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let bend = if limb.is_arm() {
        [0.03 * limb.side(), -0.05, 0.02]
    } else {
        [0.0, 0.0, -0.06]
    };
    let mid = add(lerp(root, end, 0.5), bend);
    let distal = lerp(mid, end, if limb.is_arm() { 0.85 } else { 0.9 });
    (mid, distal)
}

fn ease(s: f64) -> f64 {
    0.5 - 0.5 * (std::f64::consts::PI * s).cos()
}

/// End-effector offsets of every stroked limb, one entry per frame.
fn limb_track(keypoints: &[[f64; 3]], limb: Limb, subject: &Subject, rng: &mut impl Rng) -> Vec<[f64; 3]> {
    let ready = limb.ready();
    let scaled: Vec<[f64; 3]> = keypoints.iter().map(|p| lerp(ready, *p, subject.amplitude)).collect();
    let mut segments = vec![(limb.rest(), ready, RAISE_FRAMES)];
    let mut prev = ready;
    for p in &scaled {
        segments.push((prev, *p, STROKE_FRAMES));
        prev = *p;
    }
    segments.push((prev, limb.rest(), LOWER_FRAMES));

    let mut out = vec![limb.rest(); REST_FRAMES];
    for (from, to, frames) in segments {
        let jitter = rng.random_range(0.9..1.1);
        let n = ((frames as f64 / subject.speed * jitter).round() as usize).max(2);
        out.extend((1..=n).map(|k| lerp(from, to, ease(k as f64 / n as f64))));
    }
    out.extend(std::iter::repeat_n(limb.rest(), REST_FRAMES));
    out
}

/// Lays out role positions according to `descriptor`.
fn frame_from(
    positions: &[(JointRole, [f64; 3])],
    descriptor: &SkeletonDescriptor,
    subject: &Subject,
    noise: &Normal<f64>,
    rng: &mut impl Rng,
    index: usize,
) -> SkeletonFrame {
    let hip = [0.0, 1.0, 2.5];
    let joints = (0..descriptor.joint_count())
        .map(|k| {
            let role = descriptor.role(k).expect("index in range");
            let p = positions.iter().find(|(r, _)| *r == role).expect("every role posed").1;
            let q = add(lerp(hip, p, subject.scale), subject.translation);
            Joint3D::new(
                q[0] + noise.sample(rng),
                q[1] + noise.sample(rng),
                q[2] + noise.sample(rng),
            )
        })
        .collect();
    SkeletonFrame::new(index, joints)
}

/// Frames of one performance, indexed from 0.
pub fn render(
    spec: &GestureSpec,
    subject: &Subject,
    descriptor: &SkeletonDescriptor,
    rng: &mut impl Rng,
) -> Vec<SkeletonFrame> {
    let rest = rest_positions();
    let tracks: Vec<(Limb, Vec<[f64; 3]>)> = spec
        .strokes
        .iter()
        .map(|(limb, pts)| (*limb, limb_track(pts, *limb, subject, rng)))
        .collect();
    let len = tracks.iter().map(|(_, t)| t.len()).max().unwrap_or(0);
    let noise = Normal::new(0.0, subject.noise.max(0.0)).expect("finite noise");
    (0..len)
        .map(|t| {
            let mut pose = rest.clone();
            for (limb, track) in &tracks {
                let [r, m, d, e] = limb.chain();
                let root = pose.iter().find(|(role, _)| *role == r).unwrap().1;
                let end = add(root, *track.get(t).unwrap_or(&limb.rest()));
                let (mid, distal) = limb_joints(*limb, root, end);
                for (role, p) in pose.iter_mut() {
                    if *role == m {
                        *p = mid;
                    } else if *role == d {
                        *p = distal;
                    } else if *role == e {
                        *p = end;
                    }
                }
            }
            frame_from(&pose, descriptor, subject, &noise, rng, t)
        })
        .collect()
}

/// Rest pose with noise, indexed from `start`.
pub fn idle(
    subject: &Subject,
    descriptor: &SkeletonDescriptor,
    frames: usize,
    start: usize,
    rng: &mut impl Rng,
) -> Vec<SkeletonFrame> {
    let rest = rest_positions();
    let noise = Normal::new(0.0, subject.noise.max(0.0)).expect("finite noise");
    (0..frames)
        .map(|t| frame_from(&rest, descriptor, subject, &noise, rng, start + t))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Catalog indices to include; labels are index + 1.
    pub classes: Vec<usize>,
    pub subjects: u32,
    pub episodes: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            classes: (0..20).collect(),
            subjects: 10,
            episodes: 3,
            seed: 7,
        }
    }
}

/// Class names indexed by label.
pub fn class_names(classes: &[usize]) -> Vec<(u32, String)> {
    let cat = catalog();
    classes
        .iter()
        .map(|&c| (c as u32 + 1, cat[c].name.to_owned()))
        .collect()
}

/// A labelled dataset, ordered by subject, class and episode.
pub fn dataset(config: &SynthConfig, descriptor: &SkeletonDescriptor) -> Result<Vec<GestureInstance>> {
    let cat = catalog();
    if let Some(&c) = config.classes.iter().find(|&&c| c >= cat.len()) {
        return Err(Error::input(format!("catalog has no gesture {c}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut out = Vec::new();
    for s in 1..=config.subjects {
        let subject = Subject::sample(&mut rng);
        for &c in &config.classes {
            for e in 1..=config.episodes {
                let frames = render(&cat[c], &subject, descriptor, &mut rng);
                out.push(GestureInstance::new(frames, c as u32 + 1, s, e)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_twenty_named_gestures() {
        let cat = catalog();
        assert_eq!(cat.len(), 20);
        let mut names: Vec<_> = cat.iter().map(|g| g.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 20);
    }

    #[test]
    fn gestures_have_typical_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = SkeletonDescriptor::kinect_sdk();
        for spec in catalog() {
            let frames = render(&spec, &Subject::nominal(), &d, &mut rng);
            assert!(
                (25..=70).contains(&frames.len()),
                "{} has {} frames",
                spec.name,
                frames.len()
            );
            assert!(frames.iter().all(|f| f.all_valid()));
        }
    }

    #[test]
    fn dataset_is_deterministic() {
        let cfg = SynthConfig {
            classes: vec![0, 4],
            subjects: 2,
            episodes: 2,
            seed: 3,
        };
        let d = SkeletonDescriptor::msr_action3d();
        assert_eq!(dataset(&cfg, &d).unwrap(), dataset(&cfg, &d).unwrap());
        assert_eq!(dataset(&cfg, &d).unwrap().len(), 8);
    }
}
