use std::collections::BTreeMap;

use msdhmm::dual_stage::{argmax, compute_stream_weights, GestureGroup};
use msdhmm::synth::{self, SynthConfig};
use msdhmm::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn train_toy(classes: Vec<usize>, hyper: &HyperParams) -> (DualStageModel, Vec<GestureInstance>) {
    let d = SkeletonDescriptor::kinect_sdk();
    let train = synth::dataset(
        &SynthConfig {
            classes: classes.clone(),
            subjects: 3,
            episodes: 2,
            seed: 1,
        },
        &d,
    )
    .unwrap();
    let test = synth::dataset(
        &SynthConfig {
            classes,
            subjects: 2,
            episodes: 2,
            seed: 2,
        },
        &d,
    )
    .unwrap();
    let model = DualStageModel::train(&train, &d, hyper, &BTreeMap::new(), &BTreeMap::new()).unwrap();
    (model, test)
}

#[test]
fn weight_ratio_follows_displacement_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dir_a: [f64; 3] = [0.3, -0.8, 0.52];
    let dir_b: [f64; 3] = [-0.6, 0.0, 0.8];
    let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let step_b = 0.013;
    let mut frames = Vec::new();
    let (mut a, mut b) = ([1.0, 1.0, 2.0], [0.5, 1.5, 2.0]);
    for t in 0..30 {
        frames.push(SkeletonFrame::new(
            t,
            vec![
                Joint3D::new(0.0, 1.0, 2.5),
                Joint3D::new(a[0], a[1], a[2]),
                Joint3D::new(b[0], b[1], b[2]),
            ],
        ));
        // random sign per frame keeps the per-frame distance fixed
        let sa = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let sb = if rng.random::<bool>() { 1.0 } else { -1.0 };
        for k in 0..3 {
            a[k] += sa * 2.0 * step_b * dir_a[k] / norm(dir_a);
            b[k] += sb * step_b * dir_b[k] / norm(dir_b);
        }
    }
    let g = GestureInstance::new(frames.clone(), 1, 1, 1).unwrap();

    // direct displacement sums
    let dist = |j: usize| -> f64 {
        frames
            .windows(2)
            .map(|w| {
                let (p, q) = (w[0].position(j).unwrap(), w[1].position(j).unwrap());
                norm([q[0] - p[0], q[1] - p[1], q[2] - p[2]])
            })
            .sum()
    };
    assert!((dist(1) / dist(2) - 2.0).abs() < 1e-9);

    let cfg = FeatureConfig::new(vec![1, 2], 0, 10).unwrap();
    let w = compute_stream_weights(&[&g], &cfg);
    assert!((w.as_slice()[0] / w.as_slice()[9] - 2.0).abs() < 1e-9);
}

/// A model whose every state strongly prefers `symbol` on every stream.
fn peaked(n: usize, d: usize, l: usize, symbol: usize, eps: f64) -> MsdHmm {
    let mut initial = vec![0.0; n];
    initial[0] = 1.0;
    let mut transition = vec![0.0; n * n];
    for i in 0..n {
        if i + 1 < n {
            transition[i * n + i] = 0.7;
            transition[i * n + i + 1] = 0.3;
        } else {
            transition[i * n + i] = 1.0;
        }
    }
    let mut emission = Vec::new();
    for s in 0..n * d {
        let peak = (symbol + s % d) % l;
        let table: Vec<f64> = (0..l).map(|x| if x == peak { 1.0 } else { 0.0 }).collect();
        emission.extend(table.iter().map(|p| (p + eps) / (1.0 + eps * l as f64)));
    }
    MsdHmm::new(n, d, l, 1, initial, transition, emission, vec![1.0; d]).unwrap()
}

#[test]
fn samples_from_own_model_are_classified_as_own_class() {
    let (n, d, l) = (4, 3, 6);
    let uniform = peaked(n, d, l, 0, 1e6);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut correct = 0;
    for trial in 0..100 {
        let c = trial % 5;
        let bank: Vec<MsdHmm> = (0..5)
            .map(|k| {
                if k == c {
                    peaked(n, d, l, k, 0.3)
                } else {
                    uniform.clone()
                }
            })
            .collect();
        // sample 20 observations from the class model
        let own = &bank[c];
        let mut seq = Vec::new();
        let mut state = 0;
        for t in 0..20 {
            if t > 0 && state + 1 < n && rng.random::<f64>() < own.transition_prob(state, state + 1) {
                state += 1;
            }
            let symbols = (0..d)
                .map(|s| {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    (0..l)
                        .find(|&x| {
                            acc += own.emission_prob(state, s, x);
                            u < acc
                        })
                        .unwrap_or(l - 1) as u16
                })
                .collect();
            seq.push(QuantizedObservation::new(symbols));
        }
        let scores: Vec<(u32, f64)> = bank
            .iter()
            .enumerate()
            .map(|(k, m)| (k as u32, m.log_likelihood(&seq).unwrap()))
            .collect();
        correct += (argmax(&scores) == Some(c as u32)) as usize;
    }
    assert!(correct >= 95, "{correct}/100");
}

#[test]
fn classes_in_different_groups_get_one_model_each() {
    let (model, _) = train_toy(vec![1, 16], &HyperParams::default());
    assert_eq!(model.stage2().len(), 2);
    for (_, bank) in model.stage2() {
        assert_eq!(bank.models.len(), 1);
    }
    let groups: Vec<_> = model.classes().iter().map(|c| c.group).collect();
    assert_ne!(groups[0], groups[1]);
}

#[test]
fn toy_model_classifies_held_out_gestures() {
    let (model, test) = train_toy(vec![0, 1, 4, 11, 16], &HyperParams::default());
    let total: usize = model.stage2().iter().map(|(_, b)| b.classes.len()).sum();
    assert_eq!(total, 5);
    let mut correct = 0;
    for g in &test {
        let c = model.classify(&g.frames).unwrap();
        // with unit weights stage one is a plain argmax over its bank
        let seq = model.stage1().encode(&g.frames).unwrap();
        assert_eq!(argmax(&model.stage1().scores(&seq).unwrap()), Some(c.stage1_class));
        assert_eq!(c.group, model.group_of(c.stage1_class).unwrap());
        correct += (c.class == g.label) as usize;
    }
    assert!(correct * 10 >= test.len() * 9, "{correct}/{}", test.len());
}

#[test]
fn single_class_model_always_answers_that_class() {
    let (model, test) = train_toy(vec![3], &HyperParams::default());
    let (_, others) = train_toy(vec![5, 17], &HyperParams::default());
    for g in test.iter().chain(&others) {
        assert_eq!(model.classify(&g.frames).unwrap().class, 4);
    }
}

#[test]
fn model_file_is_deterministic_and_round_trips() {
    let hyper = HyperParams::default();
    let (a, test) = train_toy(vec![0, 2], &hyper);
    let (b, _) = train_toy(vec![0, 2], &hyper);
    let text = a.to_text().unwrap();
    assert_eq!(text, b.to_text().unwrap());
    let back = DualStageModel::from_text(&text).unwrap();
    assert_eq!(back, a);
    assert_eq!(back.to_text().unwrap(), text);
    for g in &test {
        assert_eq!(a.classify(&g.frames).unwrap(), back.classify(&g.frames).unwrap());
    }
}

#[test]
fn corrupted_model_files_are_rejected() {
    let (a, _) = train_toy(vec![0, 2], &HyperParams::default());
    let text = a.to_text().unwrap();
    assert!(DualStageModel::from_text(&text.replace("\"version\": 1", "\"version\": 2")).is_err());
    assert!(DualStageModel::from_text(&text.replace("msdhmm-pipeline", "other")).is_err());
    assert!(DualStageModel::from_text(&text.replace("\"RUP\"", "\"LLP\"")).is_err());
    assert!(DualStageModel::from_text("{").is_err());
}

#[test]
fn overrides_and_ablation_flags_apply() {
    let d = SkeletonDescriptor::kinect_sdk();
    let data = synth::dataset(
        &SynthConfig {
            classes: vec![0, 1],
            subjects: 2,
            episodes: 2,
            seed: 4,
        },
        &d,
    )
    .unwrap();
    let hyper = HyperParams {
        normalize: false,
        weighted: false,
        ..HyperParams::default()
    };
    let overrides = BTreeMap::from([(2, GestureGroup::Upper)]);
    let m = DualStageModel::train(&data, &d, &hyper, &overrides, &BTreeMap::new()).unwrap();
    assert_eq!(m.group_of(2), Some(GestureGroup::Upper));
    assert_eq!(m.group_of(1), Some(GestureGroup::RightUpper));
    for (_, bank) in m.stage2() {
        assert!(bank.models.iter().all(|h| h.weights().iter().all(|&w| w == 1.0)));
        assert!(bank.pipeline.normalizer.min.iter().all(|&x| x == -1.0));
    }
}

#[test]
fn subset_keeps_requested_classes() {
    let (model, test) = train_toy(vec![0, 1, 2, 16], &HyperParams::default());
    let small = model.subset(&[1, 3]).unwrap();
    assert_eq!(small.class_ids(), vec![1, 3]);
    small.check().unwrap();
    for g in &test {
        assert!([1, 3].contains(&small.classify(&g.frames).unwrap().class));
    }
}
