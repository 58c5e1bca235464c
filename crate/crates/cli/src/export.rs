//! `export-stream` and `synth`: produce data files for the other commands.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use msdhmm::skeleton::{
    make_split, merge_instances, write_msr_skeleton, write_sidecar, write_stream, IdleSource, SplitKind,
};
use msdhmm::synth::{self, SynthConfig};
use msdhmm::{GestureInstance, SkeletonDescriptor};

use crate::config::Settings;
use crate::{data, UsageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Part {
    Train,
    Test,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub allowlist: Option<PathBuf>,
    /// Idle frames before, between and after instances.
    #[arg(long, default_value_t = 30)]
    pub gap: usize,
    /// `hold-previous` or `hold-next`.
    #[arg(long, default_value = "hold-previous")]
    pub idle: String,
    /// Keep only one part of a split (first fold).
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long, value_enum, default_value = "test")]
    pub part: Part,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub stream: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
}

pub fn run_export(args: &ExportArgs, settings: Settings) -> Result<String> {
    let idle: IdleSource = args
        .idle
        .parse()
        .map_err(|e: msdhmm::Error| UsageError(e.to_string()))?;
    let (dataset, _) = data::load(&args.data, &settings.descriptor, args.allowlist.as_deref())?;
    let chosen: Vec<GestureInstance> = match &args.split {
        Some(s) => {
            let kind: SplitKind = s.parse().map_err(|e: msdhmm::Error| UsageError(e.to_string()))?;
            let folds = make_split(&dataset.instances, &kind, args.seed)?;
            let fold = &folds[0];
            let idx = if args.part == Part::Train {
                &fold.train
            } else {
                &fold.test
            };
            idx.iter().map(|&i| dataset.instances[i].clone()).collect()
        }
        None => dataset.instances.clone(),
    };
    let (frames, segments) = merge_instances(&chosen, args.gap, idle);
    fs::write(&args.stream, write_stream(&frames)).with_context(|| format!("writing {}", args.stream.display()))?;
    fs::write(&args.truth, write_sidecar(&segments)).with_context(|| format!("writing {}", args.truth.display()))?;
    let mut out = String::new();
    writeln!(out, "instances {}", chosen.len())?;
    writeln!(out, "frames    {}", frames.len())?;
    writeln!(out, "stream    {}", args.stream.display())?;
    writeln!(out, "truth     {}", args.truth.display())?;
    Ok(out)
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated class labels from the built-in catalog (1-based).
    #[arg(long, value_delimiter = ',', default_values_t = 1..=20u32)]
    pub classes: Vec<u32>,
    #[arg(long, default_value_t = 10)]
    pub subjects: u32,
    #[arg(long, default_value_t = 3)]
    pub episodes: u32,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Joint layout of the written files.
    #[arg(long, default_value = "msr-action3d")]
    pub descriptor: String,
}

pub fn file_name(g: &GestureInstance) -> String {
    format!("a{:02}_s{:02}_e{:02}_skeleton3D.txt", g.label, g.subject, g.episode)
}

pub fn run_synth(args: &SynthArgs) -> Result<String> {
    let descriptor = SkeletonDescriptor::by_name(&args.descriptor).map_err(|e| UsageError(e.to_string()))?;
    let size = synth::catalog().len() as u32;
    if let Some(c) = args.classes.iter().find(|&&c| c == 0 || c > size) {
        return Err(UsageError(format!("class {c} is not in the catalog (1..={size})")).into());
    }
    let classes: Vec<usize> = args.classes.iter().map(|&c| c as usize - 1).collect();
    let cfg = SynthConfig {
        classes: classes.clone(),
        subjects: args.subjects,
        episodes: args.episodes,
        seed: args.seed,
    };
    let instances = synth::dataset(&cfg, &descriptor)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for g in &instances {
        fs::write(args.out.join(file_name(g)), write_msr_skeleton(g))?;
    }
    fs::write(
        args.out.join(data::CLASS_FILE),
        data::write_class_names(&synth::class_names(&classes)),
    )?;
    Ok(format!(
        "wrote {} gestures of {} classes to {}\n",
        instances.len(),
        classes.len(),
        args.out.display()
    ))
}
