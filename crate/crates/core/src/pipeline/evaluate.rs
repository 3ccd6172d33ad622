//! Scoring detections against labels for every configured view.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::eval::{
    compute_metrics, default_bins, match_detections, Detection, DetectionFile, KittiCalib,
    MatchResult, MetricsReport, View,
};
use crate::pipeline::EvalConfig;
use crate::scene_io::ObjectLabel;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub frames: Vec<usize>,
    pub reports: Vec<MetricsReport>,
    /// Per-frame matches, parallel to `reports`.
    pub matches: Vec<Vec<MatchResult>>,
    /// Requested views that could not be evaluated.
    pub unavailable: Vec<View>,
}

impl Evaluation {
    pub fn report(&self, view: View) -> Option<&MetricsReport> {
        self.reports.iter().find(|r| r.view == view)
    }

    /// Whether the first evaluated view meets the configured minimums.
    pub fn meets(&self, cfg: &EvalConfig) -> bool {
        let Some(r) = self.reports.first() else { return false };
        cfg.min_precision.is_none_or(|p| r.overall.precision >= p)
            && cfg.min_recall.is_none_or(|q| r.overall.recall >= q)
    }
}

/// Frames to score: the detection file's declared range, or else every
/// frame that has detections or labels.
pub fn scored_frames(dets: &DetectionFile, labels: &[ObjectLabel]) -> Result<Vec<usize>> {
    let label_frames: BTreeSet<usize> = labels.iter().map(|l| l.frame_index).collect();
    let last_label = label_frames.iter().next_back().copied();
    match &dets.frames {
        Some(range) => {
            let outside: Vec<usize> = dets
                .detections
                .iter()
                .map(|d| d.frame_index)
                .filter(|f| !range.contains(f))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if !outside.is_empty() {
                return Err(Error::Validation(format!(
                    "detections for frames {outside:?} lie outside the declared range {}..{}",
                    range.start(),
                    range.end()
                )));
            }
            if let Some(last) = last_label {
                if *range.end() > last {
                    return Err(Error::Validation(format!(
                        "detections cover frames up to {} but labels end at frame {last}",
                        range.end()
                    )));
                }
            }
            Ok(range.clone().collect())
        }
        None => {
            let mut all: BTreeSet<usize> = label_frames;
            let det_frames: BTreeSet<usize> = dets.detections.iter().map(|d| d.frame_index).collect();
            if let Some(last) = last_label {
                let beyond: Vec<usize> = det_frames.iter().copied().filter(|&f| f > last).collect();
                if !beyond.is_empty() {
                    return Err(Error::Validation(format!(
                        "detections for frames {beyond:?} have no labels (labels end at frame {last})"
                    )));
                }
            }
            all.extend(det_frames);
            Ok(all.into_iter().collect())
        }
    }
}

/// Matches per frame in every configured view and pools the metrics.
pub fn evaluate(
    dets: &DetectionFile,
    labels: &[ObjectLabel],
    cfg: &EvalConfig,
    calib: Option<&KittiCalib>,
) -> Result<Evaluation> {
    let frames = scored_frames(dets, labels)?;
    evaluate_frames(&dets.detections, labels, &frames, cfg, calib)
}

pub fn evaluate_frames(
    dets: &[Detection],
    labels: &[ObjectLabel],
    frames: &[usize],
    cfg: &EvalConfig,
    calib: Option<&KittiCalib>,
) -> Result<Evaluation> {
    let bins = default_bins(cfg.max_distance);
    let mut out = Evaluation {
        frames: frames.to_vec(),
        reports: vec![],
        matches: vec![],
        unavailable: vec![],
    };
    for &view in &cfg.views {
        let mut per_frame = Vec::with_capacity(frames.len());
        let mut available = true;
        for &f in frames {
            let d: Vec<Detection> = dets.iter().filter(|d| d.frame_index == f).copied().collect();
            let g: Vec<ObjectLabel> = labels.iter().filter(|l| l.frame_index == f).copied().collect();
            match match_detections(f, &d, &g, &cfg.iou_threshold, view, calib) {
                Some(m) => per_frame.push(m),
                None => {
                    available = false;
                    break;
                }
            }
        }
        if available {
            out.reports.push(compute_metrics(view, &per_frame, &bins)?);
            out.matches.push(per_frame);
        } else {
            out.unavailable.push(view);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxfit::Box3D;
    use crate::scene_io::Category;

    fn label(frame: usize, x: f64, moving: bool) -> ObjectLabel {
        ObjectLabel {
            frame_index: frame,
            category: Category::Car,
            bbox: Box3D::new([x, 1.0, -1.0], 1.5, 1.6, 3.9, 0.2).unwrap(),
            track_id: x as i64,
            is_moving: moving,
        }
    }

    #[test]
    fn labels_as_detections_score_perfectly() {
        let labels = vec![label(0, 5.0, true), label(1, 8.0, true), label(1, 20.0, false)];
        let dets = DetectionFile {
            frames: Some(0..=1),
            detections: labels
                .iter()
                .filter(|l| l.is_moving)
                .map(|l| Detection {
                    frame_index: l.frame_index,
                    category: l.category,
                    bbox: l.bbox,
                    speed: 1.0,
                })
                .collect(),
        };
        let e = evaluate(&dets, &labels, &EvalConfig::default(), None).unwrap();
        for r in &e.reports {
            assert_eq!((r.overall.precision, r.overall.recall, r.overall.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!(e.unavailable, vec![View::Image]);
    }

    #[test]
    fn empty_detections_zero_recall() {
        let labels = vec![label(0, 5.0, true)];
        let e = evaluate(&DetectionFile { frames: Some(0..=0), detections: vec![] }, &labels, &EvalConfig::default(), None).unwrap();
        assert_eq!(e.reports[0].overall.recall, 0.0);
    }

    #[test]
    fn frame_mismatch_named() {
        let labels = vec![label(0, 5.0, true)];
        let dets = DetectionFile { frames: Some(0..=4), detections: vec![] };
        match evaluate(&dets, &labels, &EvalConfig::default(), None) {
            Err(Error::Validation(msg)) => assert!(msg.contains("frame 0") && msg.contains('4'), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
