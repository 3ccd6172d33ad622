//! Geometric box estimation for proposals: center, oriented fit, IoU and a
//! size-based category.

mod box3d;
mod category;
mod center;
mod fit;
mod iou;

pub use box3d::{normalize_yaw, Box3D};
pub use category::{classify_by_size, SIZE_PRIORS};
pub use center::{centroid, estimate_center, CenterEstimate, CENTER_ANGLES};
pub use fit::{fit_box, BoxFit, FitConfig};
pub use iou::{bev_intersection, clip_convex, iou, polygon_area, IouMode};
