//! Two-stage classification.
//!
//! Stage one scores every class on the five global joints (head, hands,
//! feet) with unit stream weights; the winning class routes the gesture to
//! its body-area group. Stage two re-scores only the classes of that group
//! on the group's own joints, with stream weights proportional to how much
//! each joint moves in the class's training data.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract, FeatureConfig, FeaturePipeline, Normalizer, ObservationVector, QuantizedObservation};
use crate::hmm::{train, MsdHmm, TrainConfig};
use crate::model_file::{self, HmmRecord};
use crate::skeleton::{GestureInstance, JointRole, SkeletonDescriptor, SkeletonFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GestureGroup {
    #[serde(rename = "RUP")]
    RightUpper,
    #[serde(rename = "LUP")]
    LeftUpper,
    #[serde(rename = "RLP")]
    RightLower,
    #[serde(rename = "LLP")]
    LeftLower,
    #[serde(rename = "UP")]
    Upper,
    #[serde(rename = "BP")]
    Bottom,
    #[serde(rename = "RP")]
    Right,
    #[serde(rename = "LP")]
    Left,
}

impl GestureGroup {
    pub const ALL: [GestureGroup; 8] = [
        GestureGroup::RightUpper,
        GestureGroup::LeftUpper,
        GestureGroup::RightLower,
        GestureGroup::LeftLower,
        GestureGroup::Upper,
        GestureGroup::Bottom,
        GestureGroup::Right,
        GestureGroup::Left,
    ];

    pub const LOCAL: [GestureGroup; 4] = [
        GestureGroup::RightUpper,
        GestureGroup::LeftUpper,
        GestureGroup::RightLower,
        GestureGroup::LeftLower,
    ];

    pub const MACRO: [GestureGroup; 4] = [
        GestureGroup::Upper,
        GestureGroup::Bottom,
        GestureGroup::Right,
        GestureGroup::Left,
    ];

    pub fn code(self) -> &'static str {
        match self {
            GestureGroup::RightUpper => "RUP",
            GestureGroup::LeftUpper => "LUP",
            GestureGroup::RightLower => "RLP",
            GestureGroup::LeftLower => "LLP",
            GestureGroup::Upper => "UP",
            GestureGroup::Bottom => "BP",
            GestureGroup::Right => "RP",
            GestureGroup::Left => "LP",
        }
    }

    pub fn is_local(self) -> bool {
        GestureGroup::LOCAL.contains(&self)
    }

    /// The local areas a group is made of (itself for a local area).
    pub fn components(self) -> &'static [GestureGroup] {
        use GestureGroup::*;
        match self {
            RightUpper => &[RightUpper],
            LeftUpper => &[LeftUpper],
            RightLower => &[RightLower],
            LeftLower => &[LeftLower],
            Upper => &[RightUpper, LeftUpper],
            Bottom => &[RightLower, LeftLower],
            Right => &[RightUpper, RightLower],
            Left => &[LeftUpper, LeftLower],
        }
    }

    pub fn roles(self) -> Vec<JointRole> {
        use JointRole::*;
        self.components()
            .iter()
            .flat_map(|local| match local {
                GestureGroup::RightUpper => [ShoulderRight, ElbowRight, WristRight, HandRight],
                GestureGroup::LeftUpper => [ShoulderLeft, ElbowLeft, WristLeft, HandLeft],
                GestureGroup::RightLower => [HipRight, KneeRight, AnkleRight, FootRight],
                GestureGroup::LeftLower => [HipLeft, KneeLeft, AnkleLeft, FootLeft],
                _ => unreachable!("components are local"),
            })
            .collect()
    }
}

impl fmt::Display for GestureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for GestureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GestureGroup::ALL
            .iter()
            .copied()
            .find(|g| g.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::input(format!("unknown gesture group `{s}`")))
    }
}

/// Per-stream emission exponents, mean one.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamWeights(Vec<f64>);

impl StreamWeights {
    pub fn uniform(dim: usize) -> Self {
        Self(vec![1.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Mean per-frame displacement of each joint, pooled over all instances.
pub fn joint_motion(instances: &[&GestureInstance], joints: &[usize]) -> Vec<f64> {
    let mut sums = vec![0.0; joints.len()];
    let mut steps = 0usize;
    for g in instances {
        for w in g.frames.windows(2) {
            steps += 1;
            for (k, &j) in joints.iter().enumerate() {
                if let (Some(a), Some(b)) = (w[0].position(j), w[1].position(j)) {
                    let d2: f64 = (0..3).map(|i| (b[i] - a[i]).powi(2)).sum();
                    sums[k] += d2.sqrt();
                }
            }
        }
    }
    if steps > 0 {
        sums.iter_mut().for_each(|s| *s /= steps as f64);
    }
    sums
}

/// Weights proportional to the motion of each joint, shared by its nine
/// streams and rescaled to mean one. A motionless class gets unit weights.
pub fn compute_stream_weights(instances: &[&GestureInstance], config: &FeatureConfig) -> StreamWeights {
    let motion = joint_motion(instances, &config.joints);
    let mean = motion.iter().sum::<f64>() / motion.len() as f64;
    if !(mean > 0.0) {
        return StreamWeights::uniform(config.dim());
    }
    StreamWeights(
        motion
            .iter()
            .flat_map(|m| std::iter::repeat_n(m / mean, crate::features::FEATURES_PER_JOINT))
            .collect(),
    )
}

/// Motion energy of each local area for one class.
pub fn area_energy(instances: &[&GestureInstance], descriptor: &SkeletonDescriptor) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (k, area) in GestureGroup::LOCAL.iter().enumerate() {
        let joints = descriptor.indices_of(&area.roles())?;
        out[k] = joint_motion(instances, &joints).iter().sum();
    }
    Ok(out)
}

/// Routes every class to a body-area group.
///
/// A local area holding more than `dominance` of the class's motion energy
/// wins outright; otherwise the macro area with the largest combined energy
/// is chosen. Overrides are applied unconditionally.
pub fn assign_groups(
    per_class: &BTreeMap<u32, Vec<&GestureInstance>>,
    descriptor: &SkeletonDescriptor,
    overrides: &BTreeMap<u32, GestureGroup>,
    dominance: f64,
) -> Result<BTreeMap<u32, GestureGroup>> {
    let mut out = BTreeMap::new();
    for (&class, instances) in per_class {
        if instances.is_empty() {
            return Err(Error::input(format!("class {class} has no training instances")));
        }
        if let Some(&g) = overrides.get(&class) {
            out.insert(class, g);
            continue;
        }
        let energy = area_energy(instances, descriptor)?;
        let total: f64 = energy.iter().sum();
        let (best_local, best_energy) =
            energy.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, &e)| if e > acc.1 { (k, e) } else { acc },
            );
        let group = if total > 0.0 && best_energy > dominance * total {
            GestureGroup::LOCAL[best_local]
        } else {
            let combined = |g: GestureGroup| -> f64 {
                g.components()
                    .iter()
                    .map(|c| energy[GestureGroup::LOCAL.iter().position(|l| l == c).unwrap()])
                    .sum()
            };
            GestureGroup::MACRO
                .iter()
                .copied()
                .fold((GestureGroup::Upper, f64::NEG_INFINITY), |acc, g| {
                    let e = combined(g);
                    if e > acc.1 {
                        (g, e)
                    } else {
                        acc
                    }
                })
                .0
        };
        out.insert(class, group);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperParams {
    pub n_states: usize,
    pub levels: usize,
    pub max_jump: usize,
    pub iterations: usize,
    #[serde(with = "model_file::real")]
    pub tolerance: f64,
    #[serde(with = "model_file::real")]
    pub smoothing: f64,
    #[serde(with = "model_file::real")]
    pub dominance: f64,
    /// Fit min/max normalisation; otherwise raw features are clamped to `[-1, 1]`.
    pub normalize: bool,
    /// Motion-derived stream weights in stage two; otherwise unit weights.
    pub weighted: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            n_states: 8,
            levels: 10,
            max_jump: 1,
            iterations: 30,
            tolerance: 1e-6,
            smoothing: 1e-3,
            dominance: 0.6,
            normalize: true,
            weighted: true,
        }
    }
}

impl HyperParams {
    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            n_states: self.n_states,
            n_symbols: self.levels,
            max_jump: self.max_jump,
            iterations: self.iterations,
            tolerance: self.tolerance,
            smoothing: self.smoothing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassInfo {
    pub id: u32,
    pub name: String,
    pub group: GestureGroup,
}

/// One bank of per-class models sharing a feature pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct StageBank {
    pub pipeline: FeaturePipeline,
    pub classes: Vec<u32>,
    pub models: Vec<MsdHmm>,
}

impl StageBank {
    pub fn encode(&self, frames: &[SkeletonFrame]) -> Result<Vec<QuantizedObservation>> {
        self.pipeline.encode(frames)
    }

    /// Log-likelihood of `seq` under every class model, in bank order.
    pub fn scores(&self, seq: &[QuantizedObservation]) -> Result<Vec<(u32, f64)>> {
        self.classes
            .iter()
            .zip(&self.models)
            .map(|(&c, m)| Ok((c, m.log_likelihood(seq)?)))
            .collect()
    }

    fn subset(&self, keep: &[u32]) -> Option<StageBank> {
        let (classes, models): (Vec<u32>, Vec<MsdHmm>) = self
            .classes
            .iter()
            .zip(&self.models)
            .filter(|(c, _)| keep.contains(c))
            .map(|(c, m)| (*c, m.clone()))
            .unzip();
        (!classes.is_empty()).then(|| StageBank {
            pipeline: self.pipeline.clone(),
            classes,
            models,
        })
    }
}

/// Highest score wins; ties go to the earliest entry (lowest class id).
pub fn argmax(scores: &[(u32, f64)]) -> Option<u32> {
    let mut best: Option<(u32, f64)> = None;
    for &(c, s) in scores {
        match best {
            Some((_, b)) if !(s > b) => {}
            _ => best = Some((c, s)),
        }
    }
    best.map(|(c, _)| c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Final decision of the two-stage cascade.
    pub class: u32,
    /// Stage-one argmax, usable on its own as a single-stage classifier.
    pub stage1_class: u32,
    pub group: GestureGroup,
    pub stage1_scores: Vec<(u32, f64)>,
    pub stage2_scores: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualStageModel {
    descriptor: SkeletonDescriptor,
    hyper: HyperParams,
    classes: Vec<ClassInfo>,
    stage1: StageBank,
    stage2: Vec<(GestureGroup, StageBank)>,
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> Result<U> + Sync + Send) -> Result<Vec<U>> {
    items.iter().map(f).collect()
}

fn fit_pipeline(
    config: FeatureConfig,
    features: &[&Vec<ObservationVector>],
    normalize: bool,
) -> Result<FeaturePipeline> {
    let normalizer = if normalize {
        Normalizer::fit(features.iter().map(|v| v.as_slice()))?
    } else {
        Normalizer::identity(config.dim())
    };
    Ok(FeaturePipeline { config, normalizer })
}

fn train_bank(
    config: FeatureConfig,
    per_class: &[(u32, Vec<&GestureInstance>)],
    hyper: &HyperParams,
    weighted: bool,
) -> Result<StageBank> {
    let features: Vec<Vec<Vec<ObservationVector>>> = per_class
        .iter()
        .map(|(_, insts)| insts.iter().map(|g| extract(&g.frames, &config)).collect())
        .collect::<Result<_>>()?;
    let all: Vec<&Vec<ObservationVector>> = features.iter().flatten().collect();
    let pipeline = fit_pipeline(config, &all, hyper.normalize)?;

    let jobs: Vec<(usize, &(u32, Vec<&GestureInstance>))> = per_class.iter().enumerate().collect();
    let train_cfg = hyper.train_config();
    let models = par_map(&jobs, |(k, (_, insts))| {
        let seqs = features[*k]
            .iter()
            .map(|seq| seq.iter().map(|v| pipeline.encode_vector(v)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        let weights = if weighted {
            compute_stream_weights(insts, &pipeline.config).into_inner()
        } else {
            StreamWeights::uniform(pipeline.config.dim()).into_inner()
        };
        Ok(train(&seqs, weights, &train_cfg)?.model)
    })?;
    Ok(StageBank {
        pipeline,
        classes: per_class.iter().map(|(c, _)| *c).collect(),
        models,
    })
}

impl DualStageModel {
    /// Trains both stages. Instances are repaired first; a class whose
    /// instances are all unusable is an error. All normalisers are fit on the
    /// given (training) instances only.
    pub fn train(
        instances: &[GestureInstance],
        descriptor: &SkeletonDescriptor,
        hyper: &HyperParams,
        overrides: &BTreeMap<u32, GestureGroup>,
        names: &BTreeMap<u32, String>,
    ) -> Result<Self> {
        if instances.is_empty() {
            return Err(Error::input("no training instances"));
        }
        let mut repaired_by_class: BTreeMap<u32, Vec<GestureInstance>> = BTreeMap::new();
        for g in instances {
            let entry = repaired_by_class.entry(g.label).or_default();
            if let Ok(r) = g.repaired() {
                entry.push(r);
            }
        }
        if let Some((c, _)) = repaired_by_class.iter().find(|(_, v)| v.is_empty()) {
            return Err(Error::input(format!(
                "class {c} has no usable (valid) training instances"
            )));
        }
        let by_class: BTreeMap<u32, Vec<&GestureInstance>> = repaired_by_class
            .iter()
            .map(|(c, v)| (*c, v.iter().collect()))
            .collect();

        let reference = descriptor.reference();
        let stage1_config = FeatureConfig::new(descriptor.global_joints(), reference, hyper.levels)?;
        let all_classes: Vec<(u32, Vec<&GestureInstance>)> = by_class.iter().map(|(c, v)| (*c, v.clone())).collect();
        let stage1 = train_bank(stage1_config, &all_classes, hyper, false)?;

        let groups = assign_groups(&by_class, descriptor, overrides, hyper.dominance)?;
        let mut stage2 = Vec::new();
        for group in GestureGroup::ALL {
            let members: Vec<(u32, Vec<&GestureInstance>)> = all_classes
                .iter()
                .filter(|(c, _)| groups[c] == group)
                .cloned()
                .collect();
            if members.is_empty() {
                continue;
            }
            let joints = descriptor.indices_of(&group.roles())?;
            let config = FeatureConfig::new(joints, reference, hyper.levels)?;
            stage2.push((group, train_bank(config, &members, hyper, hyper.weighted)?));
        }

        let classes = by_class
            .keys()
            .map(|&id| ClassInfo {
                id,
                name: names.get(&id).cloned().unwrap_or_else(|| format!("class-{id}")),
                group: groups[&id],
            })
            .collect();
        Ok(Self {
            descriptor: descriptor.clone(),
            hyper: hyper.clone(),
            classes,
            stage1,
            stage2,
        })
    }

    pub fn descriptor(&self) -> &SkeletonDescriptor {
        &self.descriptor
    }

    pub fn hyper(&self) -> &HyperParams {
        &self.hyper
    }

    pub fn classes(&self) -> &[ClassInfo] {
        &self.classes
    }

    pub fn class_ids(&self) -> Vec<u32> {
        self.classes.iter().map(|c| c.id).collect()
    }

    pub fn group_of(&self, class: u32) -> Option<GestureGroup> {
        self.classes.iter().find(|c| c.id == class).map(|c| c.group)
    }

    pub fn stage1(&self) -> &StageBank {
        &self.stage1
    }

    pub fn stage2(&self) -> &[(GestureGroup, StageBank)] {
        &self.stage2
    }

    pub fn stage2_bank(&self, group: GestureGroup) -> Option<&StageBank> {
        self.stage2.iter().find(|(g, _)| *g == group).map(|(_, b)| b)
    }

    fn usable_frames<'a>(frames: &'a [SkeletonFrame]) -> Result<std::borrow::Cow<'a, [SkeletonFrame]>> {
        if frames.iter().all(SkeletonFrame::all_valid) {
            return Ok(std::borrow::Cow::Borrowed(frames));
        }
        let mut repair = crate::skeleton::StreamRepair::default();
        let fixed: Vec<_> = frames.iter().filter_map(|f| repair.repair(f)).collect();
        if fixed.is_empty() {
            return Err(Error::input("no usable frames to classify"));
        }
        Ok(std::borrow::Cow::Owned(fixed))
    }

    /// Stage-two decision among the classes of `group`.
    pub fn refine(&self, group: GestureGroup, frames: &[SkeletonFrame]) -> Result<(u32, Vec<(u32, f64)>)> {
        let frames = Self::usable_frames(frames)?;
        let bank = self
            .stage2_bank(group)
            .ok_or_else(|| Error::model(format!("no stage-two bank for group {group}")))?;
        let scores = bank.scores(&bank.encode(&frames)?)?;
        let class = argmax(&scores).ok_or_else(|| Error::model("empty stage-two bank"))?;
        Ok((class, scores))
    }

    /// Stage-one argmax over all classes.
    pub fn classify_stage1(&self, frames: &[SkeletonFrame]) -> Result<(u32, Vec<(u32, f64)>)> {
        let frames = Self::usable_frames(frames)?;
        let scores = self.stage1.scores(&self.stage1.encode(&frames)?)?;
        let class = argmax(&scores).ok_or_else(|| Error::model("empty stage-one bank"))?;
        Ok((class, scores))
    }

    pub fn classify(&self, frames: &[SkeletonFrame]) -> Result<Classification> {
        let frames = Self::usable_frames(frames)?;
        let (stage1_class, stage1_scores) = self.classify_stage1(&frames)?;
        let group = self
            .group_of(stage1_class)
            .ok_or_else(|| Error::model(format!("class {stage1_class} has no group")))?;
        let (class, stage2_scores) = self.refine(group, &frames)?;
        Ok(Classification {
            class,
            stage1_class,
            group,
            stage1_scores,
            stage2_scores,
        })
    }

    /// A model restricted to `keep`; group assignments are unchanged.
    pub fn subset(&self, keep: &[u32]) -> Result<Self> {
        let stage1 = self
            .stage1
            .subset(keep)
            .ok_or_else(|| Error::input("subset keeps no classes"))?;
        Ok(Self {
            descriptor: self.descriptor.clone(),
            hyper: self.hyper.clone(),
            classes: self.classes.iter().filter(|c| keep.contains(&c.id)).cloned().collect(),
            stage1,
            stage2: self
                .stage2
                .iter()
                .filter_map(|(g, b)| b.subset(keep).map(|b| (*g, b)))
                .collect(),
        })
    }

    pub(crate) fn to_record(&self) -> PipelineRecord {
        PipelineRecord {
            format: model_file::FORMAT.to_owned(),
            version: model_file::VERSION,
            manifest: Manifest {
                descriptor: self.descriptor.name().to_owned(),
                reference_joint: self.descriptor.reference_role().name().to_owned(),
                global_joints: self
                    .descriptor
                    .global_roles()
                    .iter()
                    .map(|r| r.name().to_owned())
                    .collect(),
                hyper: self.hyper.clone(),
                classes: self.classes.clone(),
            },
            stage1: BankRecord::from(&self.stage1),
            stage2: self
                .stage2
                .iter()
                .map(|(g, b)| GroupRecord {
                    group: *g,
                    bank: BankRecord::from(b),
                })
                .collect(),
        }
    }

    pub(crate) fn from_record(r: PipelineRecord) -> Result<Self> {
        let global = r
            .manifest
            .global_joints
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<JointRole>>>()?;
        let descriptor = SkeletonDescriptor::by_name(&r.manifest.descriptor)?
            .with_subsets(r.manifest.reference_joint.parse()?, &global)?;
        let stage1 = r.stage1.into_bank()?;
        let stage2 = r
            .stage2
            .into_iter()
            .map(|g| Ok((g.group, g.bank.into_bank()?)))
            .collect::<Result<Vec<_>>>()?;
        let model = Self {
            descriptor,
            hyper: r.manifest.hyper,
            classes: r.manifest.classes,
            stage1,
            stage2,
        };
        model.check()?;
        Ok(model)
    }

    /// Every class has one stage-one model and exactly one stage-two model,
    /// inside the bank of its group; every bank reads the joints it should.
    pub fn check(&self) -> Result<()> {
        let ids = self.class_ids();
        if self.stage1.classes != ids {
            return Err(Error::model("stage-one bank does not match the class list"));
        }
        let global = self.descriptor.global_joints();
        if self.stage1.pipeline.config.joints != global {
            return Err(Error::model("stage one must use the global joint subset"));
        }
        let reference = self.descriptor.reference();
        if std::iter::once(&self.stage1)
            .chain(self.stage2.iter().map(|(_, b)| b))
            .any(|b| b.pipeline.config.reference != reference)
        {
            return Err(Error::model("every bank must use the descriptor's reference joint"));
        }
        for (group, bank) in &self.stage2 {
            if bank.pipeline.config.joints != self.descriptor.indices_of(&group.roles())? {
                return Err(Error::model(format!(
                    "stage-two bank {group} does not use the {group} joints"
                )));
            }
        }
        for info in &self.classes {
            let owners: Vec<_> = self
                .stage2
                .iter()
                .filter(|(_, b)| b.classes.contains(&info.id))
                .map(|(g, _)| *g)
                .collect();
            if owners != [info.group] {
                return Err(Error::model(format!(
                    "class {} must live in exactly the {} stage-two bank",
                    info.id, info.group
                )));
            }
        }
        for (_, bank) in
            std::iter::once((GestureGroup::Upper, &self.stage1)).chain(self.stage2.iter().map(|(g, b)| (*g, b)))
        {
            if bank.classes.len() != bank.models.len() {
                return Err(Error::model("bank class and model counts differ"));
            }
            let dim = bank.pipeline.config.dim();
            if bank.pipeline.normalizer.dim() != dim || bank.models.iter().any(|m| m.n_streams() != dim) {
                return Err(Error::model("bank dimension mismatch"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct PipelineRecord {
    format: String,
    version: u32,
    manifest: Manifest,
    stage1: BankRecord,
    stage2: Vec<GroupRecord>,
}

/// Human-readable summary at the top of the model file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    descriptor: String,
    reference_joint: String,
    global_joints: Vec<String>,
    hyper: HyperParams,
    classes: Vec<ClassInfo>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupRecord {
    group: GestureGroup,
    bank: BankRecord,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BankRecord {
    features: FeatureConfig,
    normalizer: Normalizer,
    models: Vec<ClassModelRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassModelRecord {
    class: u32,
    hmm: HmmRecord,
}

impl From<&StageBank> for BankRecord {
    fn from(b: &StageBank) -> Self {
        Self {
            features: b.pipeline.config.clone(),
            normalizer: b.pipeline.normalizer.clone(),
            models: b
                .classes
                .iter()
                .zip(&b.models)
                .map(|(c, m)| ClassModelRecord {
                    class: *c,
                    hmm: HmmRecord::from(m),
                })
                .collect(),
        }
    }
}

impl BankRecord {
    fn into_bank(self) -> Result<StageBank> {
        self.features.validate()?;
        let (classes, models) = self
            .models
            .into_iter()
            .map(|r| Ok((r.class, MsdHmm::try_from(r.hmm)?)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        Ok(StageBank {
            pipeline: FeaturePipeline {
                config: self.features,
                normalizer: self.normalizer,
            },
            classes,
            models,
        })
    }
}
