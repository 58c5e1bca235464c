//! Online segmentation of a merged stream, scored against its sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use msdhmm::metrics::{score_online, Detection, OnlineScores};
use msdhmm::skeleton::{parse_sidecar, parse_stream, validate_sidecar};
use msdhmm::{run_stream, DualStageModel, SegmentEvent, SegmenterConfig};
use serde::Serialize;

use crate::config::Settings;
use crate::data;

#[derive(Debug, Clone, Args)]
pub struct OnlineArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Frame stream: `index x y z ...` per line.
    #[arg(long)]
    pub stream: PathBuf,
    /// Ground-truth sidecar: `class start end` per line, end exclusive.
    #[arg(long)]
    pub truth: PathBuf,
    /// IoU threshold for a valid detection.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub th: Option<f64>,
    #[arg(long)]
    pub vote: Option<f64>,
    /// Write one tab-separated event per line.
    #[arg(long)]
    pub events_out: Option<PathBuf>,
    /// Write the scores as a JSON line.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OnlineReport {
    pub record: &'static str,
    pub model_sha256: String,
    pub stream_sha256: String,
    pub truth_sha256: String,
    pub frames: usize,
    pub th: f64,
    pub vote: f64,
    pub min_frames: usize,
    pub refractory: usize,
    pub rejected: usize,
    #[serde(flatten)]
    pub scores: OnlineScores,
}

pub struct OnlineOutcome {
    pub events: Vec<SegmentEvent>,
    pub report: OnlineReport,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn detections(events: &[SegmentEvent]) -> Vec<Detection> {
    events
        .iter()
        .filter_map(|e| match *e {
            SegmentEvent::End {
                start, end, refined, ..
            } => Some(Detection {
                start,
                end,
                class: refined,
            }),
            _ => None,
        })
        .collect()
}

pub fn evaluate(args: &OnlineArgs, settings: Settings) -> Result<OnlineOutcome> {
    let model_text = read(&args.model)?;
    let model = DualStageModel::from_text(&model_text)?;
    let stream_text = read(&args.stream)?;
    let truth_text = read(&args.truth)?;
    let frames = parse_stream(&stream_text).with_context(|| format!("parsing {}", args.stream.display()))?;
    let truth = parse_sidecar(&truth_text).with_context(|| format!("parsing {}", args.truth.display()))?;
    validate_sidecar(&truth, frames.len())?;

    let config = SegmenterConfig {
        th: args.th.unwrap_or(settings.segmenter.th),
        vote: args.vote.unwrap_or(settings.segmenter.vote),
        ..settings.segmenter
    };
    let sigma = args.sigma.unwrap_or(settings.sigma);
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(crate::UsageError(format!("sigma must lie in (0, 1], got {sigma}")).into());
    }
    config.validate().map_err(|e| crate::UsageError(e.to_string()))?;

    let events = run_stream(&frames, &model, &config)?;
    let scores = score_online(&truth, &detections(&events), sigma)?;
    let report = OnlineReport {
        record: "online",
        model_sha256: data::sha256_hex(model_text.as_bytes()),
        stream_sha256: data::sha256_hex(stream_text.as_bytes()),
        truth_sha256: data::sha256_hex(truth_text.as_bytes()),
        frames: frames.len(),
        th: config.th,
        vote: config.vote,
        min_frames: config.min_frames,
        refractory: config.refractory,
        rejected: events
            .iter()
            .filter(|e| matches!(e, SegmentEvent::Rejected { .. }))
            .count(),
        scores,
    };
    Ok(OnlineOutcome { events, report })
}

pub fn events_text(events: &[SegmentEvent]) -> String {
    events.iter().map(|e| e.to_line() + "\n").collect()
}

pub fn run(args: &OnlineArgs, settings: Settings) -> Result<String> {
    let outcome = evaluate(args, settings)?;
    if let Some(path) = &args.events_out {
        fs::write(path, events_text(&outcome.events))?;
    }
    if let Some(path) = &args.report {
        fs::write(path, serde_json::to_string(&outcome.report)? + "\n")?;
    }
    let r = &outcome.report;
    let s = &r.scores;
    let mut out = String::new();
    writeln!(out, "frames            {}", r.frames)?;
    writeln!(out, "th / vote / sigma {} / {} / {}", r.th, r.vote, s.sigma)?;
    writeln!(out, "ground truth      {}", s.ground_truth)?;
    writeln!(
        out,
        "detections        {} ({} rejected candidates)",
        s.detections, r.rejected
    )?;
    writeln!(
        out,
        "detection rate    {:.4} ({}/{})",
        s.detection_rate, s.matched, s.ground_truth
    )?;
    if s.recognition_undefined {
        writeln!(out, "recognition rate  0 (undefined: no valid detections)")?;
    } else {
        writeln!(
            out,
            "recognition rate  {:.4} ({}/{})",
            s.recognition_rate, s.correct, s.valid_detections
        )?;
    }
    writeln!(out, "model             {}", r.model_sha256)?;
    Ok(out)
}
