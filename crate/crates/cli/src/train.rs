use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use msdhmm::DualStageModel;

use crate::config::Settings;
use crate::data;

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Directory of `aXX_sYY_eZZ_skeleton3D.txt` files.
    #[arg(long)]
    pub data: PathBuf,
    /// Only read the files listed here.
    #[arg(long)]
    pub allowlist: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub ablation: Ablation,
}

/// Switches that turn off parts of the pipeline, at training time.
#[derive(Debug, Clone, Copy, Default, Args)]
pub struct Ablation {
    /// Skip min/max feature normalisation.
    #[arg(long)]
    pub no_fn: bool,
    /// Use unit stream weights in stage two.
    #[arg(long)]
    pub no_wms: bool,
}

impl Ablation {
    pub fn any(self) -> bool {
        self.no_fn || self.no_wms
    }

    pub fn apply(self, settings: &mut Settings) {
        if self.no_fn {
            settings.hyper.normalize = false;
        }
        if self.no_wms {
            settings.hyper.weighted = false;
        }
    }
}

pub struct Trained {
    pub model: DualStageModel,
    pub text: String,
    pub hash: String,
}

pub fn serialize(model: DualStageModel) -> Result<Trained> {
    let text = model.to_text()?;
    let hash = data::sha256_hex(text.as_bytes());
    Ok(Trained { model, text, hash })
}

pub fn run(args: &TrainArgs, mut settings: Settings) -> Result<String> {
    args.ablation.apply(&mut settings);
    let (dataset, names) = data::load(&args.data, &settings.descriptor, args.allowlist.as_deref())?;
    let model = DualStageModel::train(
        &dataset.instances,
        &settings.descriptor,
        &settings.hyper,
        &settings.overrides,
        &names,
    )?;
    let trained = serialize(model)?;
    fs::write(&args.out, &trained.text).with_context(|| format!("writing {}", args.out.display()))?;

    let mut out = String::new();
    writeln!(
        out,
        "instances    {} ({} skipped; {})",
        dataset.instances.len(),
        dataset.skipped.len(),
        dataset.note()
    )?;
    writeln!(out, "classes      {}", trained.model.classes().len())?;
    writeln!(out, "stage-1      {} models", trained.model.stage1().models.len())?;
    for (group, bank) in trained.model.stage2() {
        writeln!(out, "stage-2 {:<4} {} models", group.code(), bank.models.len())?;
    }
    writeln!(out, "model        {}", args.out.display())?;
    writeln!(out, "sha256       {}", trained.hash)?;
    Ok(out)
}
