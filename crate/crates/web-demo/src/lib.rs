//! Browser demo: a five-gesture model trained on synthetic skeletons at
//! start-up, with classification, trellis and online segmentation views.
//! Every method returns a JSON string for the page script.

use std::collections::BTreeMap;

use msdhmm::hmm::forward;
use msdhmm::skeleton::{merge_instances, IdleSource};
use msdhmm::synth::{self, Subject, SynthConfig};
use msdhmm::{
    DualStageModel, GestureInstance, HyperParams, JointRole, Phase, SegmentEvent, Segmenter, SegmenterConfig,
    SkeletonDescriptor,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const CLASSES: [usize; 5] = [0, 1, 2, 3, 4];

const BONES: [(JointRole, JointRole); 19] = {
    use JointRole::*;
    [
        (HipCenter, Spine),
        (Spine, ShoulderCenter),
        (ShoulderCenter, Head),
        (ShoulderCenter, ShoulderLeft),
        (ShoulderLeft, ElbowLeft),
        (ElbowLeft, WristLeft),
        (WristLeft, HandLeft),
        (ShoulderCenter, ShoulderRight),
        (ShoulderRight, ElbowRight),
        (ElbowRight, WristRight),
        (WristRight, HandRight),
        (HipCenter, HipLeft),
        (HipLeft, KneeLeft),
        (KneeLeft, AnkleLeft),
        (AnkleLeft, FootLeft),
        (HipCenter, HipRight),
        (HipRight, KneeRight),
        (KneeRight, AnkleRight),
        (AnkleRight, FootRight),
    ]
};

fn js(e: msdhmm::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    model: DualStageModel,
    descriptor: SkeletonDescriptor,
    rng: ChaCha8Rng,
    current: Option<GestureInstance>,
}

impl Demo {
    pub fn train(seed: u32) -> msdhmm::Result<Demo> {
        let descriptor = SkeletonDescriptor::kinect_sdk();
        let cfg = SynthConfig {
            classes: CLASSES.to_vec(),
            subjects: 4,
            episodes: 2,
            seed: seed as u64,
        };
        let data = synth::dataset(&cfg, &descriptor)?;
        let names: BTreeMap<u32, String> = synth::class_names(&CLASSES).into_iter().collect();
        let model = DualStageModel::train(&data, &descriptor, &HyperParams::default(), &BTreeMap::new(), &names)?;
        Ok(Demo {
            model,
            descriptor,
            rng: ChaCha8Rng::seed_from_u64(seed as u64 ^ 0x5eed),
            current: None,
        })
    }

    fn render(&mut self, label: u32) -> msdhmm::Result<GestureInstance> {
        let spec = synth::catalog()
            .into_iter()
            .nth(label.wrapping_sub(1) as usize)
            .ok_or_else(|| msdhmm::Error::Input(format!("no gesture {label}")))?;
        let subject = Subject::sample(&mut self.rng);
        let frames = synth::render(&spec, &subject, &self.descriptor, &mut self.rng);
        GestureInstance::new(frames, label, 0, 0)
    }

    pub fn sample_value(&mut self, label: u32) -> msdhmm::Result<Value> {
        let g = self.render(label)?;
        let frames: Vec<Vec<[f64; 3]>> = g
            .frames
            .iter()
            .map(|f| f.joints.iter().map(|j| [j.x, j.y, j.z]).collect())
            .collect();
        let c = self.model.classify(&g.frames)?;
        self.current = Some(g);
        let scores =
            |s: &[(u32, f64)]| -> Vec<Value> { s.iter().map(|(id, ll)| json!({"class": id, "loglik": ll})).collect() };
        Ok(json!({
            "label": label,
            "frames": frames,
            "class": c.class,
            "stage1_class": c.stage1_class,
            "group": c.group.code(),
            "stage1_scores": scores(&c.stage1_scores),
            "stage2_scores": scores(&c.stage2_scores),
        }))
    }

    /// State posteriors over time for one class model on the current gesture.
    pub fn trellis_value(&self, class: u32) -> msdhmm::Result<Value> {
        let g = self
            .current
            .as_ref()
            .ok_or_else(|| msdhmm::Error::Input("sample a gesture first".into()))?;
        let group = self
            .model
            .group_of(class)
            .ok_or_else(|| msdhmm::Error::Input(format!("unknown class {class}")))?;
        let bank = self.model.stage2_bank(group).expect("every group has a bank");
        let k = bank
            .classes
            .iter()
            .position(|&c| c == class)
            .expect("class is in its bank");
        let trellis = forward(&bank.models[k], &bank.encode(&g.frames)?)?;
        let posteriors: Vec<Vec<f64>> = (0..trellis.len()).map(|t| trellis.posterior(t).to_vec()).collect();
        Ok(json!({
            "class": class,
            "states": bank.models[k].n_states(),
            "loglik": trellis.log_likelihood(),
            "posteriors": posteriors,
        }))
    }

    /// Segments a stream of `count` random gestures separated by `gap` idle frames.
    pub fn segment_value(&mut self, count: usize, gap: usize, th: f64, vote: f64) -> msdhmm::Result<Value> {
        let mut labels: Vec<u32> = (0..count).map(|i| CLASSES[i % CLASSES.len()] as u32 + 1).collect();
        labels.shuffle(&mut self.rng);
        let mut gestures = Vec::with_capacity(count);
        for &l in &labels {
            gestures.push(self.render(l)?);
        }
        let (mut frames, truth) = merge_instances(&gestures, gap, IdleSource::HoldPrevious);
        // small idle jitter keeps the pauses from being perfectly still
        let rest = synth::idle(&Subject::nominal(), &self.descriptor, frames.len(), 0, &mut self.rng);
        let origin = rest[0].clone();
        for (f, r) in frames.iter_mut().zip(&rest) {
            for ((j, a), b) in f.joints.iter_mut().zip(&r.joints).zip(&origin.joints) {
                j.x += a.x - b.x;
                j.y += a.y - b.y;
                j.z += a.z - b.z;
            }
        }

        let config = SegmenterConfig {
            th,
            vote,
            ..SegmenterConfig::default()
        };
        let mut seg = Segmenter::new(&self.model, config)?;
        let mut events = Vec::new();
        let mut trace = Vec::with_capacity(frames.len());
        for f in &frames {
            events.extend(seg.step(&self.model, f)?);
            let mut voting = 0;
            let mut models = 0;
            for p in seg.posteriors() {
                models += 1;
                voting += (!p.is_empty() && p[0] < th) as usize;
            }
            let phase = match seg.phase() {
                Phase::Idle => 0,
                _ => 1,
            };
            trace.push(json!([voting as f64 / models.max(1) as f64, phase]));
        }
        events.extend(seg.finish());
        let events: Vec<Value> = events
            .iter()
            .filter_map(|e| match *e {
                SegmentEvent::Begin { .. } => None,
                SegmentEvent::End {
                    start, end, refined, ..
                } => Some(json!({"kind": "end", "start": start, "end": end, "class": refined})),
                SegmentEvent::Rejected { start, end, reason } => {
                    Some(json!({"kind": "rejected", "start": start, "end": end, "reason": reason.as_str()}))
                }
            })
            .collect();
        let truth: Vec<Value> = truth
            .iter()
            .map(|s| json!({"start": s.start, "end": s.end, "class": s.class}))
            .collect();
        Ok(json!({"frames": frames.len(), "trace": trace, "events": events, "truth": truth}))
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> Result<Demo, JsError> {
        Demo::train(seed).map_err(js)
    }

    /// Class ids, names and groups, plus the bones of the stick figure.
    pub fn info(&self) -> String {
        let classes: Vec<Value> = self
            .model
            .classes()
            .iter()
            .map(|c| json!({"id": c.id, "name": c.name, "group": c.group.code()}))
            .collect();
        let bones: Vec<[usize; 2]> = BONES
            .iter()
            .map(|(a, b)| {
                [
                    self.descriptor.index_of(*a).expect("full layout"),
                    self.descriptor.index_of(*b).expect("full layout"),
                ]
            })
            .collect();
        json!({"classes": classes, "bones": bones}).to_string()
    }

    /// Renders a fresh gesture of class `label` and classifies it.
    pub fn sample(&mut self, label: u32) -> Result<String, JsError> {
        self.sample_value(label).map(|v| v.to_string()).map_err(js)
    }

    pub fn trellis(&self, class: u32) -> Result<String, JsError> {
        self.trellis_value(class).map(|v| v.to_string()).map_err(js)
    }

    pub fn segment(&mut self, count: usize, gap: usize, th: f64, vote: f64) -> Result<String, JsError> {
        self.segment_value(count, gap, th, vote)
            .map(|v| v.to_string())
            .map_err(js)
    }
}
