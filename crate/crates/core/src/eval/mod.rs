//! Matching detections to ground truth and computing motion-detection
//! metrics.

mod calib;
mod detection;
mod matching;
mod metrics;
mod report;

pub use calib::{image_iou, ImageBox, KittiCalib};
pub use detection::{format_detections, parse_detections, Detection, DetectionFile};
pub use matching::{
    match_boxes, match_detections, DetRecord, GtRecord, IouThreshold, MatchPair, MatchResult, View,
};
pub use metrics::{
    compute_metrics, default_bins, recall_by_distance, recall_within, Counts, DistanceBin,
    MetricsReport, Ratios,
};
pub use report::{distance_csv, format_table, metrics_csv};
