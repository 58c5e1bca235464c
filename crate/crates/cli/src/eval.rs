//! Offline evaluation over a dataset split.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use msdhmm::metrics::ConfusionMatrix;
use msdhmm::skeleton::{make_split, SplitKind};
use msdhmm::{Classification, DualStageModel, GestureInstance};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Settings;
use crate::train::{serialize, Ablation};
use crate::{data, UsageError};

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub allowlist: Option<PathBuf>,
    /// `cross-subject`, `cross-subject:1,3,5`, `fraction-1/3`, `fraction-2/3` or `loso`.
    #[arg(long, default_value = "cross-subject")]
    pub split: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluate this model on every test part instead of training per fold.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Directory for `report.jsonl`, `confusion.csv` and `confusion_stage1.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub ablation: Ablation,
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldRecord {
    pub record: &'static str,
    pub fold: usize,
    pub model_sha256: String,
    pub train: usize,
    pub test: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassRecord {
    pub record: &'static str,
    pub class: u32,
    pub name: String,
    pub test: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub stage1_correct: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryRecord {
    pub record: &'static str,
    pub split: String,
    pub seed: u64,
    pub normalize: bool,
    pub weighted: bool,
    pub instances: usize,
    pub skipped_files: usize,
    pub data_note: String,
    pub folds: usize,
    pub total: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub stage1_accuracy: f64,
    pub model_sha256: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct OfflineReport {
    pub summary: SummaryRecord,
    pub folds: Vec<FoldRecord>,
    pub classes: Vec<ClassRecord>,
    pub confusion: ConfusionMatrix,
    pub confusion_stage1: ConfusionMatrix,
}

impl OfflineReport {
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&serde_json::to_string(&self.summary)?);
        out.push('\n');
        for f in &self.folds {
            out.push_str(&serde_json::to_string(f)?);
            out.push('\n');
        }
        for c in &self.classes {
            out.push_str(&serde_json::to_string(c)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_table(&self) -> String {
        let s = &self.summary;
        let mut out = String::new();
        let _ = writeln!(out, "split     {} (seed {}, {} folds)", s.split, s.seed, s.folds);
        let _ = writeln!(out, "pipeline  normalize={} weighted={}", s.normalize, s.weighted);
        let _ = writeln!(
            out,
            "data      {} instances, {} skipped; {}",
            s.instances, s.skipped_files, s.data_note
        );
        for f in &self.folds {
            let _ = writeln!(
                out,
                "fold {:<4} train {:<5} test {:<5} model {}",
                f.fold, f.train, f.test, f.model_sha256
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:>5}  {:<24} {:>6} {:>8} {:>8}",
            "class", "name", "test", "correct", "acc"
        );
        for c in &self.classes {
            let _ = writeln!(
                out,
                "{:>5}  {:<24} {:>6} {:>8} {:>8.3}",
                c.class, c.name, c.test, c.correct, c.accuracy
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "accuracy         {:.4} ({}/{})", s.accuracy, s.correct, s.total);
        let _ = writeln!(out, "stage-1 accuracy {:.4}", s.stage1_accuracy);
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("report.jsonl"), self.to_jsonl()?)?;
        fs::write(dir.join("confusion.csv"), self.confusion.to_csv())?;
        fs::write(dir.join("confusion_stage1.csv"), self.confusion_stage1.to_csv())?;
        Ok(())
    }
}

fn classify_all(
    model: &DualStageModel,
    instances: &[GestureInstance],
    test: &[usize],
) -> msdhmm::Result<Vec<Classification>> {
    // indexed parallel collect keeps the input order
    test.par_iter().map(|&i| model.classify(&instances[i].frames)).collect()
}

pub fn evaluate(args: &EvalArgs, mut settings: Settings) -> Result<OfflineReport> {
    let split: SplitKind = args
        .split
        .parse()
        .map_err(|e: msdhmm::Error| UsageError(e.to_string()))?;
    let fixed = match &args.model {
        Some(path) => {
            if args.ablation.any() {
                return Err(UsageError(
                    "--no-fn/--no-wms apply to training and cannot be combined with --model".into(),
                )
                .into());
            }
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let model = DualStageModel::from_text(&text)?;
            settings.descriptor = model.descriptor().clone();
            settings.hyper = model.hyper().clone();
            Some((model, data::sha256_hex(text.as_bytes())))
        }
        None => None,
    };
    args.ablation.apply(&mut settings);

    let (dataset, names) = data::load(&args.data, &settings.descriptor, args.allowlist.as_deref())?;
    let instances = &dataset.instances;
    let folds = make_split(instances, &split, args.seed)?;

    let labels: Vec<u32> = instances.iter().map(|g| g.label).collect();
    let mut all_classes = labels.clone();
    if let Some((m, _)) = &fixed {
        all_classes.extend(m.class_ids());
    }
    let mut confusion = ConfusionMatrix::new(all_classes.clone());
    let mut confusion_stage1 = ConfusionMatrix::new(all_classes);
    let mut fold_records = Vec::new();

    for (k, fold) in folds.iter().enumerate() {
        let trained;
        let (model, hash) = match &fixed {
            Some((m, h)) => (m, h.clone()),
            None => {
                let train: Vec<GestureInstance> = fold.train.iter().map(|&i| instances[i].clone()).collect();
                let model = DualStageModel::train(
                    &train,
                    &settings.descriptor,
                    &settings.hyper,
                    &settings.overrides,
                    &names,
                )?;
                trained = serialize(model)?;
                (&trained.model, trained.hash.clone())
            }
        };
        let results = classify_all(model, instances, &fold.test)?;
        let mut correct = 0;
        for (&i, c) in fold.test.iter().zip(&results) {
            confusion.add(labels[i], c.class)?;
            confusion_stage1.add(labels[i], c.stage1_class)?;
            correct += (c.class == labels[i]) as usize;
        }
        fold_records.push(FoldRecord {
            record: "fold",
            fold: k,
            model_sha256: hash,
            train: fold.train.len(),
            test: fold.test.len(),
            correct,
        });
    }

    let per_class = confusion.per_class_accuracy();
    let classes = per_class
        .iter()
        .map(|(&c, &accuracy)| ClassRecord {
            record: "class",
            class: c,
            name: names.get(&c).cloned().unwrap_or_else(|| format!("class-{c}")),
            test: confusion.row_total(c),
            correct: confusion.count(c, c),
            accuracy,
            stage1_correct: confusion_stage1.count(c, c),
        })
        .collect();

    let mut hashes: Vec<String> = fold_records.iter().map(|f| f.model_sha256.clone()).collect();
    hashes.dedup();
    let summary = SummaryRecord {
        record: "summary",
        split: split.to_string(),
        seed: args.seed,
        normalize: settings.hyper.normalize,
        weighted: settings.hyper.weighted,
        instances: instances.len(),
        skipped_files: dataset.skipped.len(),
        data_note: dataset.note(),
        folds: folds.len(),
        total: confusion.total(),
        correct: confusion.correct(),
        accuracy: confusion.accuracy(),
        stage1_accuracy: confusion_stage1.accuracy(),
        model_sha256: hashes,
    };
    Ok(OfflineReport {
        summary,
        folds: fold_records,
        classes,
        confusion,
        confusion_stage1,
    })
}

pub fn run(args: &EvalArgs, settings: Settings) -> Result<String> {
    let report = evaluate(args, settings)?;
    if let Some(dir) = &args.out {
        report.write(dir)?;
    }
    Ok(report.to_table())
}
