use msdhmm::features::{extract, quantize, quantize_value, FeatureConfig, FeaturePipeline, Normalizer};
use msdhmm::{Joint3D, ObservationVector, SkeletonFrame};
use proptest::prelude::*;

fn frames_from(coords: &[Vec<[f64; 3]>]) -> Vec<SkeletonFrame> {
    coords
        .iter()
        .enumerate()
        .map(|(i, f)| SkeletonFrame::new(i, f.iter().map(|c| Joint3D::new(c[0], c[1], c[2])).collect()))
        .collect()
}

fn coord() -> impl Strategy<Value = f64> {
    0.1f64..3.0
}

fn skeleton(joints: usize, frames: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<[f64; 3]>>> {
    prop::collection::vec(prop::collection::vec([coord(), coord(), coord()], joints), frames)
}

#[test]
fn five_frame_sequence_matches_direct_formula() {
    // joint 0 is the reference, joints 1 and 2 are features
    let p: Vec<Vec<[f64; 3]>> = vec![
        vec![[1.0, 1.0, 2.0], [1.3, 1.5, 2.1], [0.7, 0.4, 2.2]],
        vec![[1.1, 1.0, 2.0], [1.2, 1.7, 2.0], [0.8, 0.5, 2.4]],
        vec![[1.0, 1.1, 2.1], [1.6, 1.1, 1.9], [0.6, 0.5, 2.3]],
        vec![[0.9, 1.0, 2.0], [1.4, 1.9, 2.2], [0.9, 0.3, 2.0]],
        vec![[1.2, 0.9, 2.2], [1.0, 1.4, 2.5], [0.5, 0.6, 2.1]],
    ];
    let cfg = FeatureConfig::new(vec![1, 2], 0, 10).unwrap();
    let out = extract(&frames_from(&p), &cfg).unwrap();
    assert_eq!(out.len(), 5);
    for t in 0..5usize {
        let t1 = t.saturating_sub(1);
        let t2 = t.saturating_sub(2);
        let mut expected = Vec::new();
        for j in [1, 2] {
            for a in 0..3 {
                expected.push(p[t][j][a] - p[t][0][a]);
            }
            for a in 0..3 {
                expected.push(p[t][j][a] - p[t1][j][a]);
            }
            for a in 0..3 {
                expected.push(p[t][j][a] - 2.0 * p[t1][j][a] + p[t2][j][a]);
            }
        }
        for (got, want) in out[t].as_slice().iter().zip(&expected) {
            assert!((got - want).abs() < 1e-12, "t={t}: {got} vs {want}");
        }
    }
}

#[test]
fn zero_maps_to_middle_bin() {
    assert_eq!(quantize_value(0.0, 10), ((0.0f64 + 1.0) / 2.0 * 10.0).floor() as u16);
    assert_eq!(quantize_value(0.0, 10), 5);
}

#[test]
fn midpoint_of_two_vectors_is_zero() {
    let a = vec![ObservationVector::new(vec![0.0, 0.0])];
    let b = vec![ObservationVector::new(vec![2.0, 2.0])];
    let n = Normalizer::fit([a.as_slice(), b.as_slice()]).unwrap();
    assert_eq!(
        n.normalize(&ObservationVector::new(vec![1.0, 1.0])).unwrap().as_slice(),
        &[0.0, 0.0]
    );
}

proptest! {
    #[test]
    fn quantisation_is_monotone(a in -1.5f64..1.5, b in -1.5f64..1.5, levels in 2usize..40) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(quantize_value(lo, levels) <= quantize_value(hi, levels));
    }

    #[test]
    fn quantisation_boundaries_and_range(x in -1.0f64..=1.0, levels in 2usize..40) {
        prop_assert_eq!(quantize_value(-1.0, levels), 0);
        prop_assert_eq!(quantize_value(1.0, levels) as usize, levels - 1);
        prop_assert!((quantize_value(x, levels) as usize) < levels);
    }

    #[test]
    fn out_of_range_values_clamp(x in 1.0f64..100.0, levels in 2usize..40) {
        prop_assert_eq!(quantize_value(x, levels) as usize, levels - 1);
        prop_assert_eq!(quantize_value(-x, levels), 0);
    }

    #[test]
    fn normalisation_stays_in_unit_interval(
        train in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 4), 1..20),
        probe in prop::collection::vec(-500.0f64..500.0, 4),
    ) {
        let seq: Vec<_> = train.into_iter().map(ObservationVector::new).collect();
        let n = Normalizer::fit([seq.as_slice()]).unwrap();
        for v in seq.iter().chain(std::iter::once(&ObservationVector::new(probe))) {
            let y = n.normalize(v).unwrap();
            prop_assert!(y.as_slice().iter().all(|x| (-1.0..=1.0).contains(x)));
        }
        for d in 0..4 {
            if n.is_constant(d) {
                prop_assert_eq!(n.normalize(&seq[0]).unwrap().as_slice()[d], 0.0);
            }
        }
    }

    #[test]
    fn features_ignore_rigid_translation(p in skeleton(3, 1..=6), shift in [-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0]) {
        let moved: Vec<Vec<[f64; 3]>> = p
            .iter()
            .map(|f| f.iter().map(|c| [c[0] + shift[0], c[1] + shift[1], c[2] + shift[2]]).collect())
            .collect();
        let cfg = FeatureConfig::new(vec![1, 2], 0, 10).unwrap();
        let a = extract(&frames_from(&p), &cfg).unwrap();
        let b = extract(&frames_from(&moved), &cfg).unwrap();
        for (u, v) in a.iter().zip(&b) {
            for (x, y) in u.as_slice().iter().zip(v.as_slice()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn encoding_is_deterministic_and_in_range(p in skeleton(3, 1..=8), levels in 2usize..20) {
        let cfg = FeatureConfig::new(vec![1, 2], 0, levels).unwrap();
        let frames = frames_from(&p);
        let feats = extract(&frames, &cfg).unwrap();
        let pipeline = FeaturePipeline { normalizer: Normalizer::fit([feats.as_slice()]).unwrap(), config: cfg };
        let a = pipeline.encode(&frames).unwrap();
        prop_assert_eq!(&a, &pipeline.encode(&frames).unwrap());
        for q in &a {
            prop_assert_eq!(q.len(), 18);
            prop_assert!(q.symbols().iter().all(|&s| (s as usize) < levels));
        }
        let direct: Vec<_> = feats.iter().map(|v| quantize(&pipeline.normalizer.normalize(v).unwrap(), levels)).collect();
        prop_assert_eq!(a, direct);
    }
}
