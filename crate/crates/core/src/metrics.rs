//! Offline and online evaluation metrics.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::skeleton::GroundTruthSegment;

/// Intersection over union of half-open frame intervals.
pub fn iou(a: (usize, usize), b: (usize, usize)) -> f64 {
    let inter = a.1.min(b.1).saturating_sub(a.0.max(b.0));
    let union = (a.1 - a.0) + (b.1 - b.0) - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// A detected gesture segment, `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Detection {
    pub start: usize,
    pub end: usize,
    pub class: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnlineScores {
    pub sigma: f64,
    pub ground_truth: usize,
    pub detections: usize,
    /// Ground-truth segments matched one-to-one at IoU >= sigma.
    pub matched: usize,
    pub detection_rate: f64,
    /// Detections whose best ground-truth overlap reaches sigma.
    pub valid_detections: usize,
    pub correct: usize,
    pub recognition_rate: f64,
    /// Set when no detection was valid and the recognition rate is reported as 0.
    pub recognition_undefined: bool,
}

/// Greedy one-to-one matching by decreasing IoU, returning `(gt, detection)`
/// index pairs. Ties go to the earlier ground truth, then the earlier
/// detection.
pub fn greedy_match(gt: &[GroundTruthSegment], det: &[Detection], sigma: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (g, s) in gt.iter().enumerate() {
        for (d, x) in det.iter().enumerate() {
            let v = iou((s.start, s.end), (x.start, x.end));
            if v >= sigma && v > 0.0 {
                pairs.push((v, g, d));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut gt_used = vec![false; gt.len()];
    let mut det_used = vec![false; det.len()];
    let mut out = Vec::new();
    for (_, g, d) in pairs {
        if !gt_used[g] && !det_used[d] {
            gt_used[g] = true;
            det_used[d] = true;
            out.push((g, d));
        }
    }
    out.sort_unstable();
    out
}

/// Detection and recognition rates. Overlapping ground truth is an error.
pub fn score_online(gt: &[GroundTruthSegment], det: &[Detection], sigma: f64) -> Result<OnlineScores> {
    let mut sorted: Vec<_> = gt.to_vec();
    sorted.sort_by_key(|s| (s.start, s.end));
    if sorted.iter().any(|s| s.end <= s.start) {
        return Err(Error::input("ground-truth segment with end <= start"));
    }
    if sorted.windows(2).any(|w| w[1].start < w[0].end) {
        return Err(Error::input("ground-truth segments overlap"));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::input(format!("sigma must lie in (0, 1], got {sigma}")));
    }

    let matched = greedy_match(&sorted, det, sigma).len();
    let mut valid = 0;
    let mut correct = 0;
    for d in det {
        let mut best: Option<(f64, &GroundTruthSegment)> = None;
        for s in &sorted {
            let v = iou((s.start, s.end), (d.start, d.end));
            if best.is_none_or(|(b, _)| v > b) {
                best = Some((v, s));
            }
        }
        if let Some((v, s)) = best {
            if v >= sigma {
                valid += 1;
                if s.class == d.class {
                    correct += 1;
                }
            }
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(OnlineScores {
        sigma,
        ground_truth: sorted.len(),
        detections: det.len(),
        matched,
        detection_rate: ratio(matched, sorted.len()),
        valid_detections: valid,
        correct,
        recognition_rate: ratio(correct, valid),
        recognition_undefined: valid == 0,
    })
}

/// Rows are true classes, columns predictions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: Vec<u32>,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(mut classes: Vec<u32>) -> Self {
        classes.sort_unstable();
        classes.dedup();
        let n = classes.len();
        Self {
            classes,
            counts: vec![0; n * n],
        }
    }

    pub fn classes(&self) -> &[u32] {
        &self.classes
    }

    fn slot(&self, class: u32) -> Result<usize> {
        self.classes
            .binary_search(&class)
            .map_err(|_| Error::input(format!("class {class} not in confusion matrix")))
    }

    pub fn add(&mut self, truth: u32, predicted: u32) -> Result<()> {
        let (r, c) = (self.slot(truth)?, self.slot(predicted)?);
        let n = self.classes.len();
        self.counts[r * n + c] += 1;
        Ok(())
    }

    pub fn count(&self, truth: u32, predicted: u32) -> u64 {
        match (self.slot(truth), self.slot(predicted)) {
            (Ok(r), Ok(c)) => self.counts[r * self.classes.len() + c],
            _ => 0,
        }
    }

    pub fn row_total(&self, truth: u32) -> u64 {
        self.classes.iter().map(|&p| self.count(truth, p)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn correct(&self) -> u64 {
        self.classes.iter().map(|&c| self.count(c, c)).sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.correct() as f64 / t as f64,
        }
    }

    /// Accuracy per true class; classes without test samples are omitted.
    pub fn per_class_accuracy(&self) -> BTreeMap<u32, f64> {
        self.classes
            .iter()
            .filter_map(|&c| {
                let total = self.row_total(c);
                (total > 0).then(|| (c, self.count(c, c) as f64 / total as f64))
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for c in &self.classes {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
        for &r in &self.classes {
            out.push_str(&r.to_string());
            for &c in &self.classes {
                out.push_str(&format!(",{}", self.count(r, c)));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt(class: u32, start: usize, end: usize) -> GroundTruthSegment {
        GroundTruthSegment { class, start, end }
    }

    fn det(class: u32, start: usize, end: usize) -> Detection {
        Detection { class, start, end }
    }

    #[test]
    fn iou_of_half_open_intervals() {
        assert_eq!(iou((0, 10), (0, 10)), 1.0);
        assert_eq!(iou((0, 10), (10, 20)), 0.0);
        assert_eq!(iou((0, 10), (5, 15)), 5.0 / 15.0);
        assert_eq!(iou((0, 10), (2, 4)), 0.2);
    }

    #[test]
    fn perfect_detections_score_one() {
        let g = [gt(1, 0, 10), gt(2, 20, 30)];
        let d = [det(1, 0, 10), det(2, 20, 30)];
        let s = score_online(&g, &d, 0.5).unwrap();
        assert_eq!((s.detection_rate, s.recognition_rate), (1.0, 1.0));
    }

    #[test]
    fn no_detections_flags_recognition() {
        let s = score_online(&[gt(1, 0, 10)], &[], 0.5).unwrap();
        assert_eq!(s.detection_rate, 0.0);
        assert_eq!(s.recognition_rate, 0.0);
        assert!(s.recognition_undefined);
    }

    #[test]
    fn one_ground_truth_matches_once() {
        let g = [gt(1, 0, 10)];
        let d = [det(1, 0, 10), det(1, 1, 10)];
        let s = score_online(&g, &d, 0.5).unwrap();
        assert_eq!(s.matched, 1);
        assert_eq!(s.detection_rate, 1.0);
        assert_eq!(greedy_match(&g, &d, 0.5), vec![(0, 0)]);
    }

    #[test]
    fn overlapping_ground_truth_is_rejected() {
        assert!(score_online(&[gt(1, 0, 10), gt(2, 5, 15)], &[], 0.5).is_err());
    }

    #[test]
    fn max_iou_ties_prefer_earlier_ground_truth() {
        // detection [5, 15) overlaps both equally
        let g = [gt(1, 0, 10), gt(2, 10, 20)];
        let s = score_online(&g, &[det(1, 5, 15)], 0.3).unwrap();
        assert_eq!(s.correct, 1);
    }

    #[test]
    fn confusion_rows_sum_to_counts() {
        let mut m = ConfusionMatrix::new(vec![3, 1, 2]);
        for (t, p) in [(1, 1), (1, 2), (2, 2), (3, 3), (3, 3)] {
            m.add(t, p).unwrap();
        }
        assert_eq!(m.row_total(1), 2);
        assert_eq!(m.accuracy(), 0.8);
        assert_eq!(m.per_class_accuracy()[&1], 0.5);
        assert!(m.to_csv().starts_with("true\\predicted,1,2,3\n1,1,1,0\n"));
    }
}
