//! Latency and throughput measurements.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use msdhmm::skeleton::{merge_instances, IdleSource};
use msdhmm::synth::{self, SynthConfig};
use msdhmm::{DualStageModel, GestureInstance, Segmenter, SegmenterConfig};
use serde::Serialize;

use crate::data;

/// Per-action classification time reported for the original system.
pub const REFERENCE_LATENCY_S: f64 = 4.4e-2;
/// Online frame rate reported for the original system.
pub const REFERENCE_FPS: f64 = 80.35;
/// Machine the reference numbers were measured on.
pub const REFERENCE_HARDWARE: &str = "Intel i7-4790 (3.60 GHz), 16 GB RAM";
/// Mean gesture length used to turn per-frame cost into per-gesture cost.
pub const MEAN_GESTURE_FRAMES: f64 = 41.0;
pub const SWEEP_SIZES: [usize; 4] = [5, 10, 15, 20];

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Gestures to time; synthetic ones are rendered when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub allowlist: Option<PathBuf>,
    /// Number of classifications to time (at least 100).
    #[arg(long, default_value_t = 100)]
    pub gestures: usize,
    /// Skip the class-count sweep.
    #[arg(long)]
    pub no_sweep: bool,
    /// Write the report as a JSON line.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub classes: usize,
    pub latency_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub record: &'static str,
    pub model_sha256: String,
    pub classifications: usize,
    pub frames_classified: usize,
    pub per_frame_s: f64,
    /// Per-frame cost times the mean gesture length.
    pub latency_s: f64,
    pub reference_latency_s: f64,
    pub stream_frames: usize,
    pub fps: f64,
    pub reference_fps: f64,
    pub stage1_models: usize,
    pub stage2_models: Vec<(String, usize)>,
    pub sweep: Vec<SweepPoint>,
    pub hardware: String,
}

pub fn hardware_note() -> String {
    let cpu = fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|t| {
            t.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_owned())
        })
        .unwrap_or_else(|| "unknown cpu".to_owned());
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    format!(
        "{cpu}; {threads} threads; {}-{}; {profile} build",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

/// Seconds per frame of offline two-stage classification.
pub fn per_frame_cost(model: &DualStageModel, gestures: &[GestureInstance]) -> Result<(f64, usize)> {
    let frames: usize = gestures.iter().map(GestureInstance::len).sum();
    let start = Instant::now();
    for g in gestures {
        std::hint::black_box(model.classify(&g.frames)?);
    }
    Ok((start.elapsed().as_secs_f64() / frames.max(1) as f64, frames))
}

/// Frames per second of the online segmenter over one merged stream.
pub fn stream_fps(model: &DualStageModel, gestures: &[GestureInstance]) -> Result<(f64, usize)> {
    let (frames, _) = merge_instances(gestures, 30, IdleSource::HoldPrevious);
    let mut seg = Segmenter::new(model, SegmenterConfig::default())?;
    let start = Instant::now();
    for f in &frames {
        std::hint::black_box(seg.step(model, f)?);
    }
    std::hint::black_box(seg.finish());
    let elapsed = start.elapsed().as_secs_f64().max(1e-9);
    Ok((frames.len() as f64 / elapsed, frames.len()))
}

/// Synthetic gestures rendered for the model's skeleton layout.
pub fn synthetic_gestures(model: &DualStageModel, count: usize) -> Result<Vec<GestureInstance>> {
    let classes: Vec<usize> = (0..synth::catalog().len()).collect();
    let subjects = count.div_ceil(classes.len()).max(1) as u32;
    let cfg = SynthConfig {
        classes,
        subjects,
        episodes: 1,
        seed: 99,
    };
    Ok(synth::dataset(&cfg, model.descriptor())?)
}

pub fn measure(
    model: &DualStageModel,
    model_sha256: String,
    gestures: &[GestureInstance],
    sweep: bool,
) -> Result<BenchReport> {
    let (per_frame_s, frames_classified) = per_frame_cost(model, gestures)?;
    let (fps, stream_frames) = stream_fps(model, gestures)?;
    let mut points = Vec::new();
    if sweep {
        let ids = model.class_ids();
        for size in SWEEP_SIZES.into_iter().filter(|&k| k <= ids.len()) {
            let small = model.subset(&ids[..size])?;
            let (cost, _) = per_frame_cost(&small, gestures)?;
            points.push(SweepPoint {
                classes: size,
                latency_s: cost * MEAN_GESTURE_FRAMES,
            });
        }
    }
    Ok(BenchReport {
        record: "bench",
        model_sha256,
        classifications: gestures.len(),
        frames_classified,
        per_frame_s,
        latency_s: per_frame_s * MEAN_GESTURE_FRAMES,
        reference_latency_s: REFERENCE_LATENCY_S,
        stream_frames,
        fps,
        reference_fps: REFERENCE_FPS,
        stage1_models: model.stage1().models.len(),
        stage2_models: model
            .stage2()
            .iter()
            .map(|(g, b)| (g.code().to_owned(), b.models.len()))
            .collect(),
        sweep: points,
        hardware: hardware_note(),
    })
}

impl BenchReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "hardware        {}", self.hardware);
        let _ = writeln!(out, "reference hw    {REFERENCE_HARDWARE}");
        let _ = writeln!(out, "model           {}", self.model_sha256);
        let stage2: Vec<String> = self.stage2_models.iter().map(|(g, n)| format!("{g}:{n}")).collect();
        let _ = writeln!(
            out,
            "models          stage-1 {}; stage-2 {}",
            self.stage1_models,
            stage2.join(" ")
        );
        let _ = writeln!(
            out,
            "latency         {:.3e} s per gesture ({} classifications, {:.3e} s/frame x {MEAN_GESTURE_FRAMES})   reference {:.1e} s",
            self.latency_s, self.classifications, self.per_frame_s, self.reference_latency_s
        );
        let _ = writeln!(
            out,
            "online          {:.2} fps over {} frames   reference {:.2} fps",
            self.fps, self.stream_frames, self.reference_fps
        );
        for p in &self.sweep {
            let _ = writeln!(out, "sweep {:>3} cls   {:.3e} s per gesture", p.classes, p.latency_s);
        }
        out
    }
}

pub fn run(args: &BenchArgs) -> Result<String> {
    let text = fs::read_to_string(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    let model = DualStageModel::from_text(&text)?;
    let pool = match &args.data {
        Some(dir) => {
            data::load(dir, model.descriptor(), args.allowlist.as_deref())?
                .0
                .instances
        }
        None => synthetic_gestures(&model, args.gestures)?,
    };
    let count = args.gestures.max(100);
    let gestures: Vec<GestureInstance> = pool.iter().cycle().take(count).cloned().collect();
    let report = measure(&model, data::sha256_hex(text.as_bytes()), &gestures, !args.no_sweep)?;
    if let Some(path) = &args.report {
        fs::write(path, serde_json::to_string(&report)? + "\n")?;
    }
    Ok(report.to_table())
}
