//! Precision, recall and F1 pooled over frames.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::eval::{MatchResult, View};
use crate::scene_io::Category;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Ratios in `[0, 1]`. A ratio with a zero denominator is reported as 0 and
/// flagged.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Ratios {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// No detections.
    pub precision_undefined: bool,
    /// No moving ground truth.
    pub recall_undefined: bool,
}

impl Counts {
    pub fn ratios(&self) -> Ratios {
        let (tp, fp, fn_) = (
            self.true_positives as f64,
            self.false_positives as f64,
            self.false_negatives as f64,
        );
        let precision_undefined = tp + fp == 0.0;
        let recall_undefined = tp + fn_ == 0.0;
        let precision = if precision_undefined { 0.0 } else { tp / (tp + fp) };
        let recall = if recall_undefined { 0.0 } else { tp / (tp + fn_) };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Ratios {
            precision,
            recall,
            f1,
            precision_undefined,
            recall_undefined,
        }
    }

    fn add(&mut self, m: &MatchResult) {
        self.true_positives += m.true_positives;
        self.false_positives += m.false_positives;
        self.false_negatives += m.false_negatives;
    }
}

/// Recall among ground truth whose distance falls in `(lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceBin {
    pub lower: f64,
    /// `None` for the open last bin.
    pub upper: Option<f64>,
    pub ground_truth: usize,
    pub detected: usize,
    /// `None` when the bin holds no ground truth.
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub view: View,
    pub frames: usize,
    pub counts: Counts,
    pub overall: Ratios,
    pub per_category: BTreeMap<Category, (Counts, Ratios)>,
    pub distance: Vec<DistanceBin>,
}

impl MetricsReport {
    /// No detections and no moving ground truth at all.
    pub fn is_degenerate(&self) -> bool {
        self.overall.precision_undefined && self.overall.recall_undefined
    }
}

/// Default bin bounds: every 10 m up to `max`.
pub fn default_bins(max: f64) -> Vec<f64> {
    (1..).map(|k| 10.0 * k as f64).take_while(|&b| b <= max + 1e-9).collect()
}

pub fn recall_by_distance(matches: &[MatchResult], bins: &[f64]) -> Result<Vec<DistanceBin>> {
    if bins.iter().any(|b| !b.is_finite() || *b <= 0.0) || bins.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation(format!(
            "distance bins must be positive and strictly increasing, got {bins:?}"
        )));
    }
    let mut gt = vec![0usize; bins.len() + 1];
    let mut hit = vec![0usize; bins.len() + 1];
    for m in matches {
        for g in &m.gts {
            let k = bins.iter().position(|&b| g.distance <= b).unwrap_or(bins.len());
            gt[k] += 1;
            hit[k] += g.detected as usize;
        }
    }
    Ok((0..=bins.len())
        .map(|k| DistanceBin {
            lower: if k == 0 { 0.0 } else { bins[k - 1] },
            upper: bins.get(k).copied(),
            ground_truth: gt[k],
            detected: hit[k],
            recall: (gt[k] > 0).then(|| hit[k] as f64 / gt[k] as f64),
        })
        .collect())
}

/// Recall over ground truth within `max_distance`, or `None` if there is none.
pub fn recall_within(matches: &[MatchResult], max_distance: f64) -> Option<f64> {
    let (mut n, mut hit) = (0usize, 0usize);
    for g in matches.iter().flat_map(|m| &m.gts) {
        if g.distance <= max_distance {
            n += 1;
            hit += g.detected as usize;
        }
    }
    (n > 0).then(|| hit as f64 / n as f64)
}

pub fn compute_metrics(view: View, matches: &[MatchResult], bins: &[f64]) -> Result<MetricsReport> {
    let mut counts = Counts::default();
    let mut per: BTreeMap<Category, Counts> = BTreeMap::new();
    for m in matches {
        counts.add(m);
        for g in &m.gts {
            let c = per.entry(g.category).or_default();
            if g.detected {
                c.true_positives += 1;
            } else {
                c.false_negatives += 1;
            }
        }
        for d in m.dets.iter().filter(|d| !d.matched) {
            per.entry(d.category).or_default().false_positives += 1;
        }
    }
    Ok(MetricsReport {
        view,
        frames: matches.len(),
        counts,
        overall: counts.ratios(),
        per_category: per.into_iter().map(|(k, c)| (k, (c, c.ratios()))).collect(),
        distance: recall_by_distance(matches, bins)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::GtRecord;

    fn frame(tp: usize, fp: usize, fn_: usize) -> MatchResult {
        MatchResult {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            ..Default::default()
        }
    }

    #[test]
    fn arithmetic() {
        let r = compute_metrics(View::Bev, &[frame(2, 1, 0), frame(1, 0, 1)], &[]).unwrap();
        assert_eq!(r.overall.precision, 0.75);
        assert_eq!(r.overall.recall, 0.75);
        assert!((r.overall.f1 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn empty_is_flagged_not_nan() {
        let r = compute_metrics(View::Bev, &[frame(0, 0, 0)], &[]).unwrap();
        assert_eq!((r.overall.precision, r.overall.recall, r.overall.f1), (0.0, 0.0, 0.0));
        assert!(r.is_degenerate());
    }

    fn with_gts(gts: &[(f64, bool)]) -> MatchResult {
        MatchResult {
            gts: gts
                .iter()
                .enumerate()
                .map(|(index, &(distance, detected))| GtRecord {
                    index,
                    category: Category::Car,
                    distance,
                    detected,
                })
                .collect(),
            ..Default::default()
        }
    }

    #[test]
    fn distance_bins() {
        let m = [with_gts(&[(5.0, true), (45.0, false)])];
        let b = recall_by_distance(&m, &[30.0, 60.0]).unwrap();
        assert_eq!(b[0].recall, Some(1.0));
        assert_eq!(b[1].recall, Some(0.0));
        assert_eq!(b[2].recall, None);

        let near = [with_gts(&[(3.0, true), (9.0, true)])];
        let b = recall_by_distance(&near, &default_bins(30.0)).unwrap();
        let present: Vec<_> = b.iter().filter_map(|x| x.recall).collect();
        assert_eq!(present, vec![1.0]);
    }

    #[test]
    fn unsorted_bins_rejected() {
        assert!(matches!(recall_by_distance(&[], &[20.0, 10.0]), Err(Error::Validation(_))));
    }

    #[test]
    fn default_bin_bounds() {
        assert_eq!(default_bins(30.0), vec![10.0, 20.0, 30.0]);
    }
}
