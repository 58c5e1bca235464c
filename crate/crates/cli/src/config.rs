//! TOML run configuration. Every key is optional; unknown keys are errors.
//!
//! ```toml
//! n_states = 8        # alias N
//! levels = 10         # alias L
//! th = 0.9
//! vote = 0.5          # alias v
//! sigma = 0.5
//! descriptor = "msr-action3d"
//! reference_joint = "hip_center"
//! global_joints = ["head", "hand_left", "hand_right", "foot_left", "foot_right"]
//!
//! [group_overrides]
//! 7 = "UP"
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use msdhmm::dual_stage::GestureGroup;
use msdhmm::{HyperParams, JointRole, SegmenterConfig, SkeletonDescriptor};
use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(alias = "N")]
    pub n_states: Option<usize>,
    #[serde(alias = "L")]
    pub levels: Option<usize>,
    pub max_jump: Option<usize>,
    pub iterations: Option<usize>,
    pub tolerance: Option<f64>,
    pub smoothing: Option<f64>,
    pub dominance: Option<f64>,
    pub normalize: Option<bool>,
    pub weighted: Option<bool>,

    pub th: Option<f64>,
    #[serde(alias = "v")]
    pub vote: Option<f64>,
    pub min_frames: Option<usize>,
    pub max_frames: Option<usize>,
    pub refractory: Option<usize>,
    pub sigma: Option<f64>,

    pub descriptor: Option<String>,
    pub reference_joint: Option<String>,
    pub global_joints: Option<Vec<String>>,
    #[serde(default)]
    pub group_overrides: BTreeMap<String, String>,
}

/// A configuration with defaults filled in and every name resolved.
#[derive(Debug, Clone)]
pub struct Settings {
    pub hyper: HyperParams,
    pub segmenter: SegmenterConfig,
    pub sigma: f64,
    pub descriptor: SkeletonDescriptor,
    pub overrides: BTreeMap<u32, GestureGroup>,
}

impl Default for Settings {
    fn default() -> Self {
        Config::default().resolve().expect("defaults are valid")
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, UsageError> {
        toml::from_str(text).map_err(|e| UsageError(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = fs::read_to_string(path).map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn resolve(&self) -> Result<Settings, UsageError> {
        let bad = |e: msdhmm::Error| UsageError(format!("config: {e}"));
        let d = HyperParams::default();
        let hyper = HyperParams {
            n_states: self.n_states.unwrap_or(d.n_states),
            levels: self.levels.unwrap_or(d.levels),
            max_jump: self.max_jump.unwrap_or(d.max_jump),
            iterations: self.iterations.unwrap_or(d.iterations),
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            smoothing: self.smoothing.unwrap_or(d.smoothing),
            dominance: self.dominance.unwrap_or(d.dominance),
            normalize: self.normalize.unwrap_or(d.normalize),
            weighted: self.weighted.unwrap_or(d.weighted),
        };
        check_hyper(&hyper)?;

        let s = SegmenterConfig::default();
        let segmenter = SegmenterConfig {
            th: self.th.unwrap_or(s.th),
            vote: self.vote.unwrap_or(s.vote),
            min_frames: self.min_frames.unwrap_or(s.min_frames),
            max_frames: self.max_frames.or(s.max_frames),
            refractory: self.refractory.unwrap_or(s.refractory),
        };
        segmenter.validate().map_err(bad)?;

        let sigma = self.sigma.unwrap_or(0.5);
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(UsageError(format!("config: sigma must lie in (0, 1], got {sigma}")));
        }

        let mut descriptor =
            SkeletonDescriptor::by_name(self.descriptor.as_deref().unwrap_or("msr-action3d")).map_err(bad)?;
        if self.reference_joint.is_some() || self.global_joints.is_some() {
            let reference = match &self.reference_joint {
                Some(r) => r.parse::<JointRole>().map_err(bad)?,
                None => descriptor.reference_role(),
            };
            let global = match &self.global_joints {
                Some(list) => list
                    .iter()
                    .map(|r| r.parse::<JointRole>())
                    .collect::<msdhmm::Result<Vec<_>>>()
                    .map_err(bad)?,
                None => descriptor.global_roles(),
            };
            descriptor = descriptor.with_subsets(reference, &global).map_err(bad)?;
        }

        let mut overrides = BTreeMap::new();
        for (class, group) in &self.group_overrides {
            let id: u32 = class
                .parse()
                .map_err(|_| UsageError(format!("config: group override key `{class}` is not a class id")))?;
            overrides.insert(id, group.parse::<GestureGroup>().map_err(bad)?);
        }

        Ok(Settings {
            hyper,
            segmenter,
            sigma,
            descriptor,
            overrides,
        })
    }
}

fn check_hyper(h: &HyperParams) -> Result<(), UsageError> {
    let fail = |m: &str| Err(UsageError(format!("config: {m}")));
    if h.n_states == 0 {
        return fail("n_states must be positive");
    }
    if h.levels < 2 || h.levels > u16::MAX as usize {
        return fail("levels must lie in [2, 65535]");
    }
    if h.max_jump == 0 {
        return fail("max_jump must be positive");
    }
    if h.iterations == 0 {
        return fail("iterations must be positive");
    }
    if !(h.tolerance >= 0.0 && h.tolerance.is_finite()) {
        return fail("tolerance must be finite and non-negative");
    }
    if !(h.smoothing > 0.0 && h.smoothing.is_finite()) {
        return fail("smoothing must be finite and positive");
    }
    if !(h.dominance > 0.0 && h.dominance <= 1.0) {
        return fail("dominance must lie in (0, 1]");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let s = Config::parse("").unwrap().resolve().unwrap();
        assert_eq!(s.hyper, HyperParams::default());
        assert_eq!(s.segmenter, SegmenterConfig::default());
        assert_eq!(s.sigma, 0.5);
        assert_eq!(s.descriptor.name(), "msr-action3d");
    }

    #[test]
    fn short_aliases_are_accepted() {
        let s = Config::parse("N = 5\nL = 12\nv = 0.7\n").unwrap().resolve().unwrap();
        assert_eq!((s.hyper.n_states, s.hyper.levels, s.segmenter.vote), (5, 12, 0.7));
    }

    #[test]
    fn unknown_key_fails() {
        let err = Config::parse("n_states = 8\nstates = 3\n").unwrap_err();
        assert!(err.0.contains("states"), "{}", err.0);
    }

    #[test]
    fn out_of_range_values_fail() {
        for text in ["levels = 1", "th = 1.5", "vote = 0.0", "sigma = 0.0", "smoothing = 0.0"] {
            assert!(Config::parse(text).unwrap().resolve().is_err(), "{text}");
        }
    }

    #[test]
    fn subsets_and_overrides_resolve() {
        let text = r#"
descriptor = "kinect-sdk"
reference_joint = "spine"
global_joints = ["hand_left", "hand_right"]

[group_overrides]
3 = "UP"
"#;
        let s = Config::parse(text).unwrap().resolve().unwrap();
        assert_eq!(s.descriptor.reference_role(), JointRole::Spine);
        assert_eq!(
            s.descriptor.global_roles(),
            vec![JointRole::HandLeft, JointRole::HandRight]
        );
        assert_eq!(s.overrides[&3], GestureGroup::Upper);
        assert!(Config::parse("[group_overrides]\nx = \"UP\"")
            .unwrap()
            .resolve()
            .is_err());
        assert!(Config::parse("[group_overrides]\n1 = \"XX\"")
            .unwrap()
            .resolve()
            .is_err());
    }
}
