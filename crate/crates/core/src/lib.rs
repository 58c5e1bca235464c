//! Gesture recognition over 3D skeleton streams with multiple-stream
//! discrete hidden Markov models.
//!
//! The crate is organised bottom-up:
//!
//! * [`skeleton`] parses recorded skeleton files and continuous streams and
//!   builds evaluation splits.
//! * [`features`] turns frames into per-joint position / velocity /
//!   acceleration vectors, normalises them and quantises each dimension into
//!   its own discrete stream.
//! * [`hmm`] holds the left-right multiple-stream discrete HMM: weighted
//!   emissions, a scaled forward recursion and Baum-Welch training.
//! * [`dual_stage`] combines two HMM banks: a global bank picks the body-area
//!   group, a group-specific bank with motion-derived stream weights picks
//!   the class.
//! * [`online`] segments a live stream into gestures from the forward state
//!   posteriors of the first-stage bank.
//! * [`metrics`] and [`synth`] support evaluation and toy data.

pub mod dual_stage;
pub mod error;
pub mod features;
pub mod hmm;
pub mod metrics;
pub mod model_file;
pub mod online;
pub mod skeleton;
pub mod synth;

pub use dual_stage::{Classification, DualStageModel, GestureGroup, HyperParams, StreamWeights};
pub use error::{Error, Result};
pub use features::{FeatureConfig, Normalizer, ObservationVector, QuantizedObservation};
pub use hmm::{ForwardState, ForwardTrellis, MsdHmm, TrainConfig};
pub use online::{run_stream, Phase, RejectReason, SegmentEvent, Segmenter, SegmenterConfig};
pub use skeleton::{GestureInstance, Joint3D, JointRole, SkeletonDescriptor, SkeletonFrame};
