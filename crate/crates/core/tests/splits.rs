use msdhmm::skeleton::{make_split, SplitKind};
use msdhmm::{GestureInstance, Joint3D, SkeletonFrame};
use proptest::prelude::*;

fn instance(label: u32, subject: u32, episode: u32) -> GestureInstance {
    let f = SkeletonFrame::new(0, vec![Joint3D::new(1.0, 1.0, 1.0)]);
    GestureInstance::new(vec![f], label, subject, episode).unwrap()
}

fn kind() -> impl Strategy<Value = SplitKind> {
    prop_oneof![
        Just(SplitKind::one_third()),
        Just(SplitKind::two_thirds()),
        Just(SplitKind::cross_subject()),
        Just(SplitKind::LeaveOneOut),
    ]
}

proptest! {
    #[test]
    fn folds_are_disjoint_and_cover_everything(
        classes in 1u32..6,
        subjects in 2u32..8,
        episodes in 2u32..4,
        kind in kind(),
        seed in any::<u64>(),
    ) {
        let mut all = Vec::new();
        for c in 1..=classes {
            for s in 1..=subjects {
                for e in 1..=episodes {
                    all.push(instance(c, s, e));
                }
            }
        }
        let folds = make_split(&all, &kind, seed).unwrap();
        if kind == SplitKind::LeaveOneOut {
            prop_assert_eq!(folds.len(), all.len());
        }
        for fold in &folds {
            let mut seen = vec![0u8; all.len()];
            for &i in fold.train.iter().chain(&fold.test) {
                seen[i] += 1;
            }
            prop_assert!(seen.iter().all(|&n| n == 1));
            prop_assert!(!fold.test.is_empty());
            if let SplitKind::CrossSubject { train_subjects } = &kind {
                prop_assert!(fold.train.iter().all(|&i| train_subjects.contains(&all[i].subject)));
                prop_assert!(fold.test.iter().all(|&i| !train_subjects.contains(&all[i].subject)));
            }
        }
        prop_assert_eq!(&folds, &make_split(&all, &kind, seed).unwrap());
    }
}
