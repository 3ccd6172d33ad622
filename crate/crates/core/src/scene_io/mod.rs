//! Scan, pose and label readers plus the synthetic scene generator.

mod labels;
mod point_cloud;
mod pose;
mod sequence;
mod synthetic;

pub use labels::{
    format_labels, mark_moving_by_track, parse_kitti_tracking_labels, parse_labels, Category,
    ObjectLabel,
};
pub use point_cloud::{
    read_point_cloud, read_scan_file, write_point_cloud, write_scan_file, Point, PointCloud,
    ScanRead, RECORD_BYTES,
};
pub use pose::{read_pose, read_pose_file, GeoOrigin, OxtsRecord, PoseRecord, EARTH_RADIUS};
pub use sequence::{
    read_kitti_tracking, read_sequence, scan_path, write_sequence, Frame, FrameSequence,
    LoadReport, SequenceMeta,
};
pub use synthetic::{
    generate_synthetic_scene, EgoSpec, GeodeticOrigin, GroundSpec, ObjectSpec, PointSource,
    SceneSpec, SyntheticSequence, REFERENCE_RANGE,
};
