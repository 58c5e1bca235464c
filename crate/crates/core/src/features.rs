//! Per-joint kinematic features, linear normalisation and quantisation.
//!
//! For every selected joint the observation holds nine values: position
//! relative to the reference joint, first backward difference and second
//! backward difference of the absolute position. Vectors are joint-major:
//! `[j0.rx, j0.ry, j0.rz, j0.vx, .., j0.az, j1.rx, ..]`. Missing past frames
//! at the start of a sequence repeat the first frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::SkeletonFrame;

pub const FEATURES_PER_JOINT: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub joints: Vec<usize>,
    pub reference: usize,
    pub levels: usize,
}

impl FeatureConfig {
    pub fn new(joints: Vec<usize>, reference: usize, levels: usize) -> Result<Self> {
        let c = Self {
            joints,
            reference,
            levels,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.joints.is_empty() {
            return Err(Error::input("feature joint subset is empty"));
        }
        if self.levels < 2 {
            return Err(Error::input(format!(
                "need at least 2 quantisation levels, got {}",
                self.levels
            )));
        }
        if self.levels > u16::MAX as usize {
            return Err(Error::input("too many quantisation levels"));
        }
        Ok(())
    }

    /// Observation dimension `9 * G`.
    pub fn dim(&self) -> usize {
        FEATURES_PER_JOINT * self.joints.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector(Vec<f64>);

impl ObservationVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantizedObservation(Vec<u16>);

impl QuantizedObservation {
    pub fn new(symbols: Vec<u16>) -> Self {
        Self(symbols)
    }

    pub fn symbols(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Streaming feature extraction; keeps the two previous positions of every
/// selected joint.
#[derive(Debug, Clone)]
pub struct CausalExtractor {
    config: FeatureConfig,
    prev: Option<Vec<[f64; 3]>>,
    prev2: Option<Vec<[f64; 3]>>,
}

impl CausalExtractor {
    pub fn new(config: FeatureConfig) -> Self {
        Self {
            config,
            prev: None,
            prev2: None,
        }
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn reset(&mut self) {
        self.prev = None;
        self.prev2 = None;
    }

    pub fn push(&mut self, frame: &SkeletonFrame) -> Result<ObservationVector> {
        let read = |joint: usize| {
            frame.position(joint).ok_or(Error::InvalidJoint {
                frame: frame.index,
                joint,
            })
        };
        let reference = read(self.config.reference)?;
        let current = self
            .config
            .joints
            .iter()
            .map(|&j| read(j))
            .collect::<Result<Vec<_>>>()?;
        let prev = self.prev.take().unwrap_or_else(|| current.clone());
        let prev2 = self.prev2.take().unwrap_or_else(|| prev.clone());

        let mut out = Vec::with_capacity(self.config.dim());
        for ((p, p1), p2) in current.iter().zip(&prev).zip(&prev2) {
            for a in 0..3 {
                out.push(p[a] - reference[a]);
            }
            for a in 0..3 {
                out.push(p[a] - p1[a]);
            }
            for a in 0..3 {
                out.push(p[a] - 2.0 * p1[a] + p2[a]);
            }
        }
        self.prev2 = Some(prev);
        self.prev = Some(current);
        Ok(ObservationVector(out))
    }
}

/// Batch feature extraction; output length equals frame count.
pub fn extract(frames: &[SkeletonFrame], config: &FeatureConfig) -> Result<Vec<ObservationVector>> {
    if frames.is_empty() {
        return Err(Error::input("cannot extract features from an empty sequence"));
    }
    let mut ex = CausalExtractor::new(config.clone());
    frames.iter().map(|f| ex.push(f)).collect()
}

/// Per-dimension `[min, max]` of the training features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    #[serde(with = "crate::model_file::real_list")]
    pub min: Vec<f64>,
    #[serde(with = "crate::model_file::real_list")]
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn fit<'a, I>(sequences: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [ObservationVector]>,
    {
        let mut min: Vec<f64> = Vec::new();
        let mut max: Vec<f64> = Vec::new();
        for v in sequences.into_iter().flatten() {
            if min.is_empty() {
                min = v.0.clone();
                max = v.0.clone();
                continue;
            }
            if v.len() != min.len() {
                return Err(Error::Dimension {
                    expected: min.len(),
                    found: v.len(),
                });
            }
            for (d, &x) in v.0.iter().enumerate() {
                min[d] = min[d].min(x);
                max[d] = max[d].max(x);
            }
        }
        if min.is_empty() {
            return Err(Error::input("normaliser needs at least one training vector"));
        }
        Ok(Self { min, max })
    }

    /// Maps every dimension onto itself (before clamping to `[-1, 1]`).
    pub fn identity(dim: usize) -> Self {
        Self {
            min: vec![-1.0; dim],
            max: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn is_constant(&self, d: usize) -> bool {
        self.max[d] <= self.min[d]
    }

    pub fn normalize(&self, v: &ObservationVector) -> Result<ObservationVector> {
        if v.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let out =
            v.0.iter()
                .enumerate()
                .map(|(d, &x)| {
                    if self.is_constant(d) {
                        0.0
                    } else {
                        let y = 2.0 * (x - self.min[d]) / (self.max[d] - self.min[d]) - 1.0;
                        y.clamp(-1.0, 1.0)
                    }
                })
                .collect();
        Ok(ObservationVector(out))
    }
}

/// Equal-width bins over `[-1, 1]`; `+1` lands in the top bin.
pub fn quantize(v: &ObservationVector, levels: usize) -> QuantizedObservation {
    QuantizedObservation(v.0.iter().map(|&x| quantize_value(x, levels)).collect())
}

pub fn quantize_value(x: f64, levels: usize) -> u16 {
    let bin = ((x.clamp(-1.0, 1.0) + 1.0) / 2.0 * levels as f64).floor();
    (bin as usize).min(levels - 1) as u16
}

/// Extraction, normalisation and quantisation bundled for one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub config: FeatureConfig,
    pub normalizer: Normalizer,
}

impl FeaturePipeline {
    pub fn encode_vector(&self, v: &ObservationVector) -> Result<QuantizedObservation> {
        Ok(quantize(&self.normalizer.normalize(v)?, self.config.levels))
    }

    pub fn encode(&self, frames: &[SkeletonFrame]) -> Result<Vec<QuantizedObservation>> {
        extract(frames, &self.config)?
            .iter()
            .map(|v| self.encode_vector(v))
            .collect()
    }
}
