//! Streaming gesture segmentation.
//!
//! Every stage-one model keeps an incremental forward state. While idle, a
//! model votes for "gesture started" once its first-state posterior drops
//! below `th`; a strict majority of votes opens a candidate. Inside a
//! candidate the model with the best log-likelihood since the start is
//! followed until its last-state posterior reaches `th`; the candidate is
//! accepted only if enough of that model's states were visited, including
//! the second to last one. Accepted candidates are refined by stage two.

use std::fmt;
use std::str::FromStr;

use crate::dual_stage::DualStageModel;
use crate::error::{Error, Result};
use crate::features::CausalExtractor;
use crate::hmm::ForwardState;
use crate::skeleton::{SkeletonFrame, StreamRepair};

#[derive(Debug, Clone, PartialEq)]
pub struct SegmenterConfig {
    /// Posterior threshold for votes, visits and the end test.
    pub th: f64,
    /// Fraction of models that must vote; the comparison is strict.
    pub vote: f64,
    /// Candidates shorter than this are rejected.
    pub min_frames: usize,
    /// Candidates running longer than this are rejected.
    pub max_frames: Option<usize>,
    /// Frames ignored after a candidate closes.
    pub refractory: usize,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            th: 0.9,
            vote: 0.5,
            min_frames: 5,
            max_frames: None,
            refractory: 3,
        }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.th) {
            return Err(Error::input(format!("th must lie in [0, 1], got {}", self.th)));
        }
        if !(self.vote > 0.0 && self.vote <= 1.0) {
            return Err(Error::input(format!("vote must lie in (0, 1], got {}", self.vote)));
        }
        if let Some(max) = self.max_frames {
            if max < self.min_frames {
                return Err(Error::input("max_frames is below min_frames"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    TooShort,
    TooLong,
    InsufficientVisitedStates,
    SecondToLastNotVisited,
    /// The stream ended inside a candidate that passed every other check.
    StreamEnded,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::TooShort => "too-short",
            RejectReason::TooLong => "too-long",
            RejectReason::InsufficientVisitedStates => "insufficient-visited-states",
            RejectReason::SecondToLastNotVisited => "second-to-last-not-visited",
            RejectReason::StreamEnded => "stream-ended",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RejectReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            RejectReason::TooShort,
            RejectReason::TooLong,
            RejectReason::InsufficientVisitedStates,
            RejectReason::SecondToLastNotVisited,
            RejectReason::StreamEnded,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
        .ok_or_else(|| Error::input(format!("unknown reject reason `{s}`")))
    }
}

/// Frame times are ordinals in the input stream; ends are exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentEvent {
    Begin {
        start: usize,
    },
    End {
        start: usize,
        end: usize,
        class: u32,
        refined: u32,
    },
    Rejected {
        start: usize,
        end: usize,
        reason: RejectReason,
    },
}

impl SegmentEvent {
    /// Tab-separated `kind t_s t_e class refined reason`, empty where absent.
    pub fn to_line(&self) -> String {
        match self {
            SegmentEvent::Begin { start } => format!("begin\t{start}\t\t\t\t"),
            SegmentEvent::End {
                start,
                end,
                class,
                refined,
            } => format!("end\t{start}\t{end}\t{class}\t{refined}\t"),
            SegmentEvent::Rejected { start, end, reason } => format!("rejected\t{start}\t{end}\t\t\t{reason}"),
        }
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 6 {
            return Err(Error::input(format!("event line needs 6 fields, got {}", f.len())));
        }
        let num = |s: &str| -> Result<usize> { s.parse().map_err(|_| Error::input(format!("bad event field `{s}`"))) };
        match f[0] {
            "begin" => Ok(SegmentEvent::Begin { start: num(f[1])? }),
            "end" => Ok(SegmentEvent::End {
                start: num(f[1])?,
                end: num(f[2])?,
                class: num(f[3])? as u32,
                refined: num(f[4])? as u32,
            }),
            "rejected" => Ok(SegmentEvent::Rejected {
                start: num(f[1])?,
                end: num(f[2])?,
                reason: f[5].parse()?,
            }),
            other => Err(Error::input(format!("unknown event kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    InGesture,
}

#[derive(Debug, Clone)]
struct Track {
    forward: ForwardState,
    /// Log-likelihood just before the candidate's first frame.
    base: f64,
    visited: Vec<bool>,
}

/// Online segmenter state for one stream.
#[derive(Debug, Clone)]
pub struct Segmenter {
    config: SegmenterConfig,
    phase: Phase,
    clock: usize,
    start: usize,
    cooldown: usize,
    tracks: Vec<Track>,
    extractor: CausalExtractor,
    repair: StreamRepair,
    window: Vec<SkeletonFrame>,
    best: Option<usize>,
}

impl Segmenter {
    pub fn new(model: &DualStageModel, config: SegmenterConfig) -> Result<Self> {
        config.validate()?;
        let bank = model.stage1();
        Ok(Self {
            config,
            phase: Phase::Idle,
            clock: 0,
            start: 0,
            cooldown: 0,
            tracks: bank
                .models
                .iter()
                .map(|m| Track {
                    forward: ForwardState::new(m.n_states()),
                    base: 0.0,
                    visited: vec![false; m.n_states()],
                })
                .collect(),
            extractor: CausalExtractor::new(bank.pipeline.config.clone()),
            repair: StreamRepair::default(),
            window: Vec::new(),
            best: None,
        })
    }

    pub fn config(&self) -> &SegmenterConfig {
        &self.config
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Number of frames consumed so far.
    pub fn clock(&self) -> usize {
        self.clock
    }

    /// Current normalised state posterior of every stage-one model.
    pub fn posteriors(&self) -> impl Iterator<Item = &[f64]> {
        self.tracks.iter().map(|t| t.forward.posterior())
    }

    /// Bank index of the model currently followed inside a candidate.
    pub fn best_model(&self) -> Option<usize> {
        self.best
    }

    fn reset_tracks(&mut self) {
        for t in &mut self.tracks {
            t.forward.reset();
            t.base = 0.0;
            t.visited.iter_mut().for_each(|v| *v = false);
        }
        self.window.clear();
        self.best = None;
    }

    fn close(&mut self, event: SegmentEvent) -> Option<SegmentEvent> {
        self.phase = Phase::Idle;
        self.cooldown = self.config.refractory;
        self.reset_tracks();
        Some(event)
    }

    /// Consumes one frame. Frames the causal repair cannot use still advance
    /// the clock but are otherwise skipped.
    pub fn step(&mut self, model: &DualStageModel, frame: &SkeletonFrame) -> Result<Option<SegmentEvent>> {
        let t = self.clock;
        self.clock += 1;
        let Some(frame) = self.repair.repair(frame) else {
            return Ok(None);
        };
        let raw = self.extractor.push(&frame)?;
        if self.cooldown > 0 {
            self.cooldown -= 1;
            return Ok(None);
        }
        let bank = model.stage1();
        let obs = bank.pipeline.encode_vector(&raw)?;
        let th = self.config.th;

        match self.phase {
            Phase::Idle => {
                let mut votes = 0usize;
                for (track, m) in self.tracks.iter_mut().zip(&bank.models) {
                    track.base = track.forward.log_likelihood();
                    track.forward.advance(m, &obs)?;
                    if track.forward.posterior()[0] < th {
                        votes += 1;
                    }
                }
                if votes as f64 > self.config.vote * self.tracks.len() as f64 {
                    self.phase = Phase::InGesture;
                    self.start = t;
                    self.window.clear();
                    self.window.push(frame);
                    for track in &mut self.tracks {
                        mark_visited(track, th);
                    }
                    self.best = self.pick_best();
                    return Ok(Some(SegmentEvent::Begin { start: t }));
                }
                Ok(None)
            }
            Phase::InGesture => {
                for (track, m) in self.tracks.iter_mut().zip(&bank.models) {
                    track.forward.advance(m, &obs)?;
                    mark_visited(track, th);
                }
                self.window.push(frame);
                let best = self.pick_best().expect("at least one model");
                self.best = Some(best);
                let (start, end) = (self.start, t + 1);

                let track = &self.tracks[best];
                let n = track.visited.len();
                if track.forward.posterior()[n - 1] >= th {
                    let event = match self.reliability(best, end - start) {
                        Some(reason) => SegmentEvent::Rejected { start, end, reason },
                        None => {
                            let class = bank.classes[best];
                            let group = model
                                .group_of(class)
                                .ok_or_else(|| Error::model(format!("class {class} has no group")))?;
                            let (refined, _) = model.refine(group, &self.window)?;
                            SegmentEvent::End {
                                start,
                                end,
                                class,
                                refined,
                            }
                        }
                    };
                    return Ok(self.close(event));
                }
                if self.config.max_frames.is_some_and(|max| end - start > max) {
                    return Ok(self.close(SegmentEvent::Rejected {
                        start,
                        end,
                        reason: RejectReason::TooLong,
                    }));
                }
                Ok(None)
            }
        }
    }

    /// Closes an open candidate at the end of the stream, reporting the
    /// first failed reliability check or `StreamEnded`.
    pub fn finish(&mut self) -> Option<SegmentEvent> {
        if self.phase != Phase::InGesture {
            return None;
        }
        let (start, end) = (self.start, self.clock);
        let reason = self
            .best
            .and_then(|best| self.reliability(best, end - start))
            .unwrap_or(RejectReason::StreamEnded);
        self.close(SegmentEvent::Rejected { start, end, reason })
    }

    /// Why the candidate followed by model `best` cannot be accepted, if any.
    fn reliability(&self, best: usize, len: usize) -> Option<RejectReason> {
        let visited = &self.tracks[best].visited;
        let n = visited.len();
        let count = visited.iter().filter(|v| **v).count();
        if len < self.config.min_frames {
            Some(RejectReason::TooShort)
        } else if count < (2 * n).div_ceil(3) {
            Some(RejectReason::InsufficientVisitedStates)
        } else if n >= 2 && !visited[n - 2] {
            Some(RejectReason::SecondToLastNotVisited)
        } else {
            None
        }
    }

    fn pick_best(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (k, track) in self.tracks.iter().enumerate() {
            let score = track.forward.log_likelihood() - track.base;
            match best {
                Some((_, b)) if !(score > b) => {}
                _ => best = Some((k, score)),
            }
        }
        best.map(|(k, _)| k)
    }
}

fn mark_visited(track: &mut Track, th: f64) {
    for (v, &p) in track.visited.iter_mut().zip(track.forward.posterior()) {
        if p >= th {
            *v = true;
        }
    }
}

/// Folds [`Segmenter::step`] over a stream and closes it with
/// [`Segmenter::finish`].
pub fn run_stream(
    frames: &[SkeletonFrame],
    model: &DualStageModel,
    config: &SegmenterConfig,
) -> Result<Vec<SegmentEvent>> {
    let mut seg = Segmenter::new(model, config.clone())?;
    let mut events = Vec::new();
    for f in frames {
        events.extend(seg.step(model, f)?);
    }
    events.extend(seg.finish());
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_lines_round_trip() {
        let events = [
            SegmentEvent::Begin { start: 4 },
            SegmentEvent::End {
                start: 4,
                end: 40,
                class: 3,
                refined: 2,
            },
            SegmentEvent::Rejected {
                start: 50,
                end: 58,
                reason: RejectReason::InsufficientVisitedStates,
            },
        ];
        for e in events {
            assert_eq!(SegmentEvent::parse_line(&e.to_line()).unwrap(), e);
        }
        assert_eq!(events[0].to_line(), "begin\t4\t\t\t\t");
        assert_eq!(events[1].to_line(), "end\t4\t40\t3\t2\t");
    }

    #[test]
    fn config_bounds() {
        assert!(SegmenterConfig::default().validate().is_ok());
        let bad = SegmenterConfig {
            vote: 0.0,
            ..SegmenterConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SegmenterConfig {
            th: 1.5,
            ..SegmenterConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
