//! Line-delimited continuous streams and their ground-truth sidecars.
//!
//! Stream line: `index x0 y0 z0 x1 y1 z1 ...`. Sidecar line:
//! `class_id start_frame end_frame`, start inclusive, end exclusive.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{GestureInstance, Joint3D, SkeletonFrame};
use crate::error::{Error, Result};

fn schema(line: usize, field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        line,
        field: field.into(),
        message: message.into(),
    }
}

pub fn parse_stream(text: &str) -> Result<Vec<SkeletonFrame>> {
    let mut frames: Vec<SkeletonFrame> = Vec::new();
    let mut joint_count = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let index: usize = tokens
            .next()
            .unwrap_or_default()
            .parse()
            .map_err(|_| schema(line_no, "index", "not a non-negative integer"))?;
        if let Some(prev) = frames.last() {
            if index <= prev.index {
                return Err(schema(line_no, "index", "indices must be strictly increasing"));
            }
        }
        let values = tokens
            .enumerate()
            .map(|(k, t)| {
                t.parse::<f64>().map_err(|_| {
                    let axis = ["x", "y", "z"][k % 3];
                    schema(
                        line_no,
                        format!("joint[{}].{axis}", k / 3),
                        format!("`{t}` is not a number"),
                    )
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() % 3 != 0 || values.is_empty() {
            return Err(schema(
                line_no,
                "joints",
                format!("{} coordinates is not a positive multiple of 3", values.len()),
            ));
        }
        let n = values.len() / 3;
        match joint_count {
            None => joint_count = Some(n),
            Some(expected) if expected != n => {
                return Err(schema(
                    line_no,
                    "joints",
                    format!("expected {expected} joints, found {n}"),
                ))
            }
            _ => {}
        }
        let joints = values.chunks_exact(3).map(|c| Joint3D::new(c[0], c[1], c[2])).collect();
        frames.push(SkeletonFrame::new(index, joints));
    }
    Ok(frames)
}

pub fn load_stream(path: &Path) -> Result<Vec<SkeletonFrame>> {
    parse_stream(&fs::read_to_string(path)?)
}

pub fn write_stream(frames: &[SkeletonFrame]) -> String {
    let mut out = String::new();
    for f in frames {
        let _ = write!(out, "{}", f.index);
        for j in &f.joints {
            let _ = write!(out, " {} {} {}", j.x, j.y, j.z);
        }
        out.push('\n');
    }
    out
}

/// A labelled interval `[start, end)` of a continuous stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundTruthSegment {
    pub class: u32,
    pub start: usize,
    pub end: usize,
}

pub fn parse_sidecar(text: &str) -> Result<Vec<GroundTruthSegment>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<_> = line.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(schema(line_no, "record", "expected `class_id start_frame end_frame`"));
        }
        let field = |k: usize, name: &str| -> Result<u64> {
            tokens[k]
                .parse()
                .map_err(|_| schema(line_no, name, format!("`{}` is not an integer", tokens[k])))
        };
        let seg = GroundTruthSegment {
            class: field(0, "class_id")? as u32,
            start: field(1, "start_frame")? as usize,
            end: field(2, "end_frame")? as usize,
        };
        if seg.end <= seg.start {
            return Err(schema(line_no, "end_frame", "end must exceed start"));
        }
        out.push(seg);
    }
    Ok(out)
}

pub fn load_sidecar(path: &Path) -> Result<Vec<GroundTruthSegment>> {
    parse_sidecar(&fs::read_to_string(path)?)
}

pub fn write_sidecar(segments: &[GroundTruthSegment]) -> String {
    segments
        .iter()
        .map(|s| format!("{} {} {}\n", s.class, s.start, s.end))
        .collect()
}

/// Checks that every interval lies in `[0, frames)` and that no two overlap.
pub fn validate_sidecar(segments: &[GroundTruthSegment], frames: usize) -> Result<()> {
    for s in segments {
        if s.end > frames {
            return Err(Error::input(format!(
                "ground-truth segment [{}, {}) exceeds stream length {frames}",
                s.start, s.end
            )));
        }
    }
    let mut sorted = segments.to_vec();
    sorted.sort_by_key(|s| (s.start, s.end));
    if let Some(w) = sorted.windows(2).find(|w| w[1].start < w[0].end) {
        return Err(Error::input(format!(
            "ground-truth segments [{}, {}) and [{}, {}) overlap",
            w[0].start, w[0].end, w[1].start, w[1].end
        )));
    }
    Ok(())
}

/// What the idle frames between merged instances show.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IdleSource {
    /// The last frame before the gap (the first frame for the leading gap).
    #[default]
    HoldPrevious,
    /// The first frame after the gap (the last frame for the trailing gap).
    HoldNext,
}

impl std::str::FromStr for IdleSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hold-previous" => Ok(IdleSource::HoldPrevious),
            "hold-next" => Ok(IdleSource::HoldNext),
            other => Err(Error::input(format!("unknown idle source `{other}`"))),
        }
    }
}

/// Concatenates instances into one stream with `gap` idle frames before,
/// between and after them. Frame indices are renumbered from 0; the
/// returned intervals locate every instance.
pub fn merge_instances(
    instances: &[GestureInstance],
    gap: usize,
    idle: IdleSource,
) -> (Vec<SkeletonFrame>, Vec<GroundTruthSegment>) {
    let mut frames: Vec<SkeletonFrame> = Vec::new();
    let mut segments = Vec::new();
    let push = |frames: &mut Vec<SkeletonFrame>, f: &SkeletonFrame| {
        let mut f = f.clone();
        f.index = frames.len();
        frames.push(f);
    };
    for g in instances {
        let hold = match (idle, frames.last()) {
            (IdleSource::HoldPrevious, Some(last)) => last.clone(),
            _ => g.frames[0].clone(),
        };
        for _ in 0..gap {
            push(&mut frames, &hold);
        }
        let start = frames.len();
        for f in &g.frames {
            push(&mut frames, f);
        }
        segments.push(GroundTruthSegment {
            class: g.label,
            start,
            end: frames.len(),
        });
    }
    if let Some(hold) = frames.last().cloned() {
        for _ in 0..gap {
            push(&mut frames, &hold);
        }
    }
    (frames, segments)
}
