//! MSRAction3D `skeleton3D` text files.
//!
//! Layout: an optional header line holding two integers (frame count, joint
//! count), then for every frame exactly `joint_count` lines of
//! `x y z confidence`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{GestureInstance, Joint3D, SkeletonDescriptor, SkeletonFrame};
use crate::error::{Error, Result};

pub const MSR_ACTION3D_CLASSES: [&str; 20] = [
    "high arm wave",
    "horizontal arm wave",
    "hammer",
    "hand catch",
    "forward punch",
    "high throw",
    "draw x",
    "draw tick",
    "draw circle",
    "hand clap",
    "two hand wave",
    "side-boxing",
    "bend",
    "forward kick",
    "side kick",
    "jogging",
    "tennis swing",
    "tennis serve",
    "golf swing",
    "pickup & throw",
];

/// Splits `aAA_sSS_eEE_...` into (action, subject, episode).
pub fn parse_msr_file_name(name: &str) -> Option<(u32, u32, u32)> {
    let mut parts = name.split('_');
    let mut field = |prefix: char| -> Option<u32> {
        let p = parts.next()?;
        p.strip_prefix(prefix)?.parse().ok()
    };
    Some((field('a')?, field('s')?, field('e')?))
}

pub fn parse_msr_skeleton(text: &str, joint_count: usize, path: &Path) -> Result<Vec<SkeletonFrame>> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();

    if let Some((_, first)) = lines.peek() {
        let tokens: Vec<_> = first.split_whitespace().collect();
        if tokens.len() == 2 && tokens.iter().all(|t| t.parse::<u64>().is_ok()) {
            lines.next();
        }
    }

    let mut frames = Vec::new();
    let mut joints = Vec::with_capacity(joint_count);
    let mut last_line = 0;
    for (line_no, line) in lines {
        last_line = line_no;
        let mut values = [0.0f64; 4];
        let mut count = 0;
        for token in line.split_whitespace() {
            if count == 4 {
                return Err(err(line_no, "expected 4 values, found more".into()));
            }
            values[count] = token
                .parse()
                .map_err(|_| err(line_no, format!("non-numeric token `{token}`")))?;
            count += 1;
        }
        if count != 4 {
            return Err(err(line_no, format!("expected 4 values, found {count}")));
        }
        joints.push(Joint3D::new(values[0], values[1], values[2]).with_confidence(values[3]));
        if joints.len() == joint_count {
            let index = frames.len();
            frames.push(SkeletonFrame::new(index, std::mem::take(&mut joints)));
            joints.reserve(joint_count);
        }
    }
    if !joints.is_empty() {
        return Err(err(
            last_line,
            format!(
                "joint line count is not a multiple of {joint_count} ({} trailing lines)",
                joints.len()
            ),
        ));
    }
    Ok(frames)
}

/// Loads one skeleton file. Label, subject and episode come from the file
/// name when it follows the `aAA_sSS_eEE` convention and are 0 otherwise.
/// Joints are returned raw, with null joints flagged invalid.
pub fn load_msr_skeleton(path: &Path, descriptor: &SkeletonDescriptor) -> Result<GestureInstance> {
    let text = fs::read_to_string(path)?;
    let frames = parse_msr_skeleton(&text, descriptor.joint_count(), path)?;
    let (label, subject, episode) = path
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(parse_msr_file_name)
        .unwrap_or((0, 0, 0));
    GestureInstance::new(frames, label, subject, episode).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })
}

pub fn write_msr_skeleton(instance: &GestureInstance) -> String {
    let mut out = String::new();
    for frame in &instance.frames {
        for j in &frame.joints {
            let _ = writeln!(out, "{} {} {} {}", j.x, j.y, j.z, j.confidence.unwrap_or(1.0));
        }
    }
    out
}

/// Reads an allowlist: one relative file name per line, `#` starts a comment.
pub fn load_allowlist(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

#[derive(Debug, Clone)]
pub struct MsrDataset {
    pub instances: Vec<GestureInstance>,
    pub files: Vec<String>,
    /// Files that matched the naming scheme but failed to parse or repair.
    pub skipped: Vec<(String, String)>,
    pub allowlist: Option<PathBuf>,
}

impl MsrDataset {
    pub fn note(&self) -> String {
        match &self.allowlist {
            Some(p) => format!("allowlist {} applied", p.display()),
            None => "no allowlist: all parseable files used".to_owned(),
        }
    }
}

/// Loads every `aAA_sSS_eEE_*.txt` skeleton in `dir`, sorted by file name,
/// and applies null-joint repair. When `allowlist` is given only the listed
/// files are read.
pub fn load_msr_dataset(dir: &Path, descriptor: &SkeletonDescriptor, allowlist: Option<&Path>) -> Result<MsrDataset> {
    let allowed = allowlist.map(load_allowlist).transpose()?;
    let mut names: Vec<String> = match &allowed {
        Some(list) => list.clone(),
        None => fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|n| n.ends_with(".txt") && parse_msr_file_name(n).is_some())
            .collect(),
    };
    names.sort();
    names.dedup();

    let mut dataset = MsrDataset {
        instances: Vec::new(),
        files: Vec::new(),
        skipped: Vec::new(),
        allowlist: allowlist.map(Path::to_path_buf),
    };
    for name in names {
        let path = dir.join(&name);
        let loaded = load_msr_skeleton(&path, descriptor).and_then(|g| g.repaired());
        match loaded {
            Ok(g) => {
                dataset.instances.push(g);
                dataset.files.push(name);
            }
            Err(e) if allowed.is_some() => return Err(e),
            Err(e) => dataset.skipped.push((name, e.to_string())),
        }
    }
    if dataset.instances.is_empty() {
        return Err(Error::input(format!("no skeleton files found in {}", dir.display())));
    }
    Ok(dataset)
}
