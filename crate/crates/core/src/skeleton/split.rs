use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GestureInstance;
use crate::error::{Error, Result};

/// Evaluation protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitKind {
    /// Stratified per class: `numerator/denominator` of every class trains.
    Fraction { numerator: u32, denominator: u32 },
    /// Listed subjects train, all others test.
    CrossSubject { train_subjects: Vec<u32> },
    /// One fold per instance, that instance alone tests.
    LeaveOneOut,
}

impl SplitKind {
    pub fn one_third() -> Self {
        SplitKind::Fraction {
            numerator: 1,
            denominator: 3,
        }
    }

    pub fn two_thirds() -> Self {
        SplitKind::Fraction {
            numerator: 2,
            denominator: 3,
        }
    }

    /// Odd subjects train, even subjects test.
    pub fn cross_subject() -> Self {
        SplitKind::CrossSubject {
            train_subjects: vec![1, 3, 5, 7, 9],
        }
    }
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitKind::Fraction { numerator, denominator } => write!(f, "fraction-{numerator}/{denominator}"),
            SplitKind::CrossSubject { train_subjects } => {
                let list: Vec<_> = train_subjects.iter().map(u32::to_string).collect();
                write!(f, "cross-subject:{}", list.join(","))
            }
            SplitKind::LeaveOneOut => f.write_str("leave-one-sequence-out"),
        }
    }
}

impl FromStr for SplitKind {
    type Err = Error;

    /// Accepts `fraction-1/3`, `fraction-2/3`, `cross-subject`,
    /// `cross-subject:1,3,5` and `leave-one-sequence-out` (or `loso`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::input(format!("unknown split `{s}`"));
        if let Some(frac) = s.strip_prefix("fraction-") {
            let (n, d) = frac.split_once('/').ok_or_else(bad)?;
            let numerator: u32 = n.parse().map_err(|_| bad())?;
            let denominator: u32 = d.parse().map_err(|_| bad())?;
            if numerator == 0 || numerator >= denominator {
                return Err(bad());
            }
            return Ok(SplitKind::Fraction { numerator, denominator });
        }
        match s {
            "cross-subject" => return Ok(SplitKind::cross_subject()),
            "leave-one-sequence-out" | "loso" => return Ok(SplitKind::LeaveOneOut),
            _ => {}
        }
        if let Some(list) = s.strip_prefix("cross-subject:") {
            let train_subjects = list
                .split(',')
                .map(|t| t.trim().parse().map_err(|_| bad()))
                .collect::<Result<Vec<u32>>>()?;
            return Ok(SplitKind::CrossSubject { train_subjects });
        }
        Err(bad())
    }
}

/// Indices into the instance list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partitions `instances` according to `kind`. Fraction splits shuffle each
/// class with a ChaCha8 stream seeded by `seed`; the other kinds ignore it.
pub fn make_split(instances: &[GestureInstance], kind: &SplitKind, seed: u64) -> Result<Vec<Fold>> {
    if instances.is_empty() {
        return Err(Error::input("cannot split an empty instance list"));
    }
    match kind {
        SplitKind::Fraction { numerator, denominator } => {
            let (num, den) = (*numerator as usize, *denominator as usize);
            let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            for (i, g) in instances.iter().enumerate() {
                by_class.entry(g.label).or_default().push(i);
            }
            let short: Vec<u32> = by_class
                .iter()
                .filter(|(_, idx)| {
                    let n_train = (idx.len() * num + den / 2) / den;
                    n_train == 0 || n_train == idx.len()
                })
                .map(|(c, _)| *c)
                .collect();
            if !short.is_empty() {
                return Err(Error::Split {
                    classes: short,
                    message: format!("too few instances for a {num}/{den} split"),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut fold = Fold {
                train: Vec::new(),
                test: Vec::new(),
            };
            for idx in by_class.values() {
                let mut idx = idx.clone();
                idx.shuffle(&mut rng);
                let n_train = (idx.len() * num + den / 2) / den;
                fold.train.extend_from_slice(&idx[..n_train]);
                fold.test.extend_from_slice(&idx[n_train..]);
            }
            fold.train.sort_unstable();
            fold.test.sort_unstable();
            Ok(vec![fold])
        }
        SplitKind::CrossSubject { train_subjects } => {
            let (train, test): (Vec<usize>, Vec<usize>) =
                (0..instances.len()).partition(|&i| train_subjects.contains(&instances[i].subject));
            if train.is_empty() || test.is_empty() {
                return Err(Error::Split {
                    classes: Vec::new(),
                    message: "cross-subject split needs subjects on both sides".into(),
                });
            }
            Ok(vec![Fold { train, test }])
        }
        SplitKind::LeaveOneOut => {
            if instances.len() < 2 {
                return Err(Error::Split {
                    classes: Vec::new(),
                    message: "leave-one-out needs at least two instances".into(),
                });
            }
            Ok((0..instances.len())
                .map(|k| Fold {
                    train: (0..instances.len()).filter(|&i| i != k).collect(),
                    test: vec![k],
                })
                .collect())
        }
    }
}
