//! Greedy one-to-one matching of detections to moving ground truth.

use serde::{Deserialize, Serialize};

use crate::boxfit::{iou, Box3D, IouMode};
use crate::eval::{image_iou, Detection, KittiCalib};
use crate::scene_io::{Category, ObjectLabel};

/// Evaluation view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    /// Image-plane rectangles; needs a calibration.
    #[serde(rename = "2d")]
    Image,
    Bev,
    #[serde(rename = "3d")]
    ThreeD,
}

impl View {
    pub const ALL: [View; 3] = [View::Image, View::Bev, View::ThreeD];

    pub fn as_str(self) -> &'static str {
        match self {
            View::Image => "2d",
            View::Bev => "bev",
            View::ThreeD => "3d",
        }
    }
}

/// IoU needed for a match, by ground-truth category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IouThreshold {
    Uniform(f64),
    /// One value for cars and another for everything else.
    Classwise { car: f64, other: f64 },
}

impl Default for IouThreshold {
    fn default() -> Self {
        IouThreshold::Uniform(0.5)
    }
}

impl IouThreshold {
    /// 0.7 for cars, 0.5 otherwise.
    pub const KITTI: IouThreshold = IouThreshold::Classwise { car: 0.7, other: 0.5 };

    pub fn for_category(&self, c: Category) -> f64 {
        match *self {
            IouThreshold::Uniform(t) => t,
            IouThreshold::Classwise { car, other } => {
                if c == Category::Car {
                    car
                } else {
                    other
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    pub det: usize,
    pub gt: usize,
    pub iou: f64,
}

/// One moving ground-truth object as seen by the matcher.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtRecord {
    pub index: usize,
    pub category: Category,
    /// Ground-plane distance of the box center from the sensor.
    pub distance: f64,
    pub detected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetRecord {
    pub index: usize,
    pub category: Category,
    pub matched: bool,
}

/// Matching outcome for one frame and view.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchResult {
    pub frame_index: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub pairs: Vec<MatchPair>,
    pub gts: Vec<GtRecord>,
    pub dets: Vec<DetRecord>,
}

/// Greedy matching: candidate pairs with IoU at or above the ground truth's
/// threshold are taken in descending IoU order (ties by detection index, then
/// ground-truth index) while both sides are free. Only moving ground truth
/// takes part, so a detection on a static object is a false positive.
pub fn match_boxes(
    det_boxes: &[(Category, Box3D)],
    gts: &[ObjectLabel],
    threshold: &IouThreshold,
    mode: IouMode,
) -> MatchResult {
    let moving: Vec<usize> = (0..gts.len()).filter(|&g| gts[g].is_moving).collect();
    let mut cands = Vec::new();
    for (d, (_, db)) in det_boxes.iter().enumerate() {
        for &g in &moving {
            let v = iou(db, &gts[g].bbox, mode);
            if v > 0.0 && v >= threshold.for_category(gts[g].category) {
                cands.push(MatchPair { det: d, gt: g, iou: v });
            }
        }
    }
    let distances: Vec<f64> = moving.iter().map(|&g| gts[g].bbox.bev_distance_from_origin()).collect();
    greedy(det_boxes.iter().map(|d| d.0).collect(), gts, &moving, &distances, cands)
}

fn greedy(
    det_categories: Vec<Category>,
    gts: &[ObjectLabel],
    moving: &[usize],
    distances: &[f64],
    mut cands: Vec<MatchPair>,
) -> MatchResult {
    cands.sort_by(|a, b| b.iou.total_cmp(&a.iou).then(a.det.cmp(&b.det)).then(a.gt.cmp(&b.gt)));
    let mut det_used = vec![false; det_categories.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut pairs = Vec::new();
    for c in cands {
        if !det_used[c.det] && !gt_used[c.gt] {
            det_used[c.det] = true;
            gt_used[c.gt] = true;
            pairs.push(c);
        }
    }
    let tp = pairs.len();
    MatchResult {
        frame_index: gts.first().map_or(0, |g| g.frame_index),
        true_positives: tp,
        false_positives: det_categories.len() - tp,
        false_negatives: moving.len() - tp,
        pairs,
        gts: moving
            .iter()
            .zip(distances)
            .map(|(&g, &distance)| GtRecord {
                index: g,
                category: gts[g].category,
                distance,
                detected: gt_used[g],
            })
            .collect(),
        dets: det_categories
            .into_iter()
            .enumerate()
            .map(|(index, category)| DetRecord {
                index,
                category,
                matched: det_used[index],
            })
            .collect(),
    }
}

/// Matches one frame's detections in the given view. The image view needs a
/// calibration and returns `None` without one; there, boxes outside the
/// field of view are left out on both sides.
pub fn match_detections(
    frame_index: usize,
    dets: &[Detection],
    gts: &[ObjectLabel],
    threshold: &IouThreshold,
    view: View,
    calib: Option<&KittiCalib>,
) -> Option<MatchResult> {
    let mut m = match view {
        View::Bev | View::ThreeD => {
            let boxes: Vec<_> = dets.iter().map(|d| (d.category, d.bbox)).collect();
            let mode = if view == View::Bev { IouMode::Bev } else { IouMode::ThreeD };
            match_boxes(&boxes, gts, threshold, mode)
        }
        View::Image => {
            let calib = calib?;
            let det_img: Vec<_> = dets
                .iter()
                .filter_map(|d| calib.project_box(&d.bbox).map(|r| (d.category, r)))
                .collect();
            let visible: Vec<ObjectLabel> = gts
                .iter()
                .filter(|g| calib.project_box(&g.bbox).is_some())
                .copied()
                .collect();
            let moving: Vec<usize> = (0..visible.len()).filter(|&g| visible[g].is_moving).collect();
            let gt_img: Vec<_> = visible.iter().map(|g| calib.project_box(&g.bbox).expect("filtered")).collect();
            let mut cands = Vec::new();
            for (d, (_, dr)) in det_img.iter().enumerate() {
                for &g in &moving {
                    let v = image_iou(dr, &gt_img[g]);
                    if v > 0.0 && v >= threshold.for_category(visible[g].category) {
                        cands.push(MatchPair { det: d, gt: g, iou: v });
                    }
                }
            }
            let distances: Vec<f64> = moving.iter().map(|&g| visible[g].bbox.bev_distance_from_origin()).collect();
            greedy(det_img.iter().map(|d| d.0).collect(), &visible, &moving, &distances, cands)
        }
    };
    m.frame_index = frame_index;
    Some(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt(x: f64, moving: bool) -> ObjectLabel {
        ObjectLabel {
            frame_index: 0,
            category: Category::Car,
            bbox: Box3D::new([x, 0.0, 0.0], 1.5, 1.6, 3.9, 0.0).unwrap(),
            track_id: 0,
            is_moving: moving,
        }
    }

    fn det_at(x: f64) -> Detection {
        Detection {
            frame_index: 0,
            category: Category::Car,
            bbox: Box3D::new([x, 0.0, 0.0], 1.5, 1.6, 3.9, 0.0).unwrap(),
            speed: 3.0,
        }
    }

    fn run(dets: &[Detection], gts: &[ObjectLabel], t: f64) -> MatchResult {
        match_detections(0, dets, gts, &IouThreshold::Uniform(t), View::Bev, None).unwrap()
    }

    #[test]
    fn exact_detections() {
        let gts = vec![gt(0.0, true), gt(10.0, true)];
        let dets: Vec<_> = gts.iter().map(|g| det_at(g.bbox.center[0])).collect();
        let m = run(&dets, &gts, 0.5);
        assert_eq!((m.true_positives, m.false_positives, m.false_negatives), (2, 0, 0));
    }

    #[test]
    fn no_detections() {
        let gts = vec![gt(0.0, true), gt(10.0, true), gt(20.0, true)];
        let m = run(&[], &gts, 0.5);
        assert_eq!((m.true_positives, m.false_negatives), (0, 3));
    }

    #[test]
    fn greedy_takes_the_better_overlap() {
        // IoU of two 3.9 m boxes shifted by s along x is (3.9 - s) / (3.9 + s).
        let iou_for = |s: f64| (3.9 - s) / (3.9 + s);
        let s08 = 3.9 * (1.0 - 0.8) / 1.8;
        let s06 = 3.9 * (1.0 - 0.6) / 1.6;
        assert!((iou_for(s08) - 0.8).abs() < 1e-12);
        let m = run(&[det_at(s06), det_at(s08)], &[gt(0.0, true)], 0.5);
        assert_eq!((m.true_positives, m.false_positives), (1, 1));
        assert_eq!(m.pairs[0].det, 1);
        assert!((m.pairs[0].iou - 0.8).abs() < 1e-9);
    }

    #[test]
    fn static_targets_make_false_positives() {
        let m = run(&[det_at(0.0)], &[gt(0.0, false)], 0.5);
        assert_eq!((m.true_positives, m.false_positives, m.false_negatives), (0, 1, 0));
    }

    #[test]
    fn raising_threshold_never_adds_matches() {
        let gts = vec![gt(0.0, true), gt(6.0, true)];
        let dets = vec![det_at(0.5), det_at(6.9), det_at(1.2)];
        let mut last = usize::MAX;
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let tp = run(&dets, &gts, t).true_positives;
            assert!(tp <= last);
            last = tp;
        }
    }

    #[test]
    fn classwise_threshold() {
        assert_eq!(IouThreshold::KITTI.for_category(Category::Car), 0.7);
        assert_eq!(IouThreshold::KITTI.for_category(Category::Cyclist), 0.5);
    }

    #[test]
    fn image_view_needs_calibration() {
        assert!(match_detections(0, &[], &[], &IouThreshold::default(), View::Image, None).is_none());
    }
}
