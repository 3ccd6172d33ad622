//! Oriented box fit around a proposal's points.

use serde::{Deserialize, Serialize};

use crate::boxfit::center::{extents, from_frame};
use crate::boxfit::{normalize_yaw, Box3D, CenterEstimate};
use crate::error::{Error, Result};
use crate::scene_io::PointCloud;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Half-width of the yaw search around the center estimate's angle.
    pub search_deg: f64,
    pub step_deg: f64,
    /// Floor for every box dimension.
    pub min_size: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            search_deg: 15.0,
            step_deg: 1.0,
            min_size: 0.1,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_deg > 0.0) || !(self.search_deg >= 0.0) || !(self.min_size > 0.0) {
            return Err(Error::Config("box fit step, search and min_size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxFit {
    pub bbox: Box3D,
    /// Some dimension was raised to the configured minimum.
    pub degenerate: bool,
}

/// Fits a box: the yaw minimizing the ground-plane bounding-rectangle area
/// within `center.alpha +- search_deg`, extents from that rectangle, height
/// from the z range. `l` is the longer side and `yaw` its direction.
pub fn fit_box(points: &PointCloud, center: &CenterEstimate, cfg: &FitConfig) -> Result<BoxFit> {
    if points.is_empty() {
        return Err(Error::Validation("cannot fit a box to no points".into()));
    }
    let steps = (cfg.search_deg / cfg.step_deg).floor() as i64;
    let mut best: Option<(f64, f64, [[f64; 2]; 2])> = None;
    // Visit 0, -1, +1, -2, ... so ties keep the angle closest to alpha.
    for i in 0..=2 * steps {
        let k = if i % 2 == 0 { -(i / 2) } else { i / 2 + 1 };
        let theta = center.alpha + (k as f64 * cfg.step_deg).to_radians();
        let e = extents(points, theta);
        let area = (e[0][1] - e[0][0]) * (e[1][1] - e[1][0]);
        if best.is_none_or(|b| area < b.0) {
            best = Some((area, theta, e));
        }
    }
    let (_, theta, e) = best.expect("at least one angle");
    let (ex, ey) = (e[0][1] - e[0][0], e[1][1] - e[1][0]);
    let (mx, my) = ((e[0][0] + e[0][1]) / 2.0, (e[1][0] + e[1][1]) / 2.0);
    let (cx, cy) = from_frame(mx, my, theta);
    let (zmin, zmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.z), b.max(p.z)));
    let (l, w, yaw) = if ex >= ey {
        (ex, ey, theta)
    } else {
        (ey, ex, theta + std::f64::consts::FRAC_PI_2)
    };
    let h = zmax - zmin;
    let degenerate = l < cfg.min_size || w < cfg.min_size || h < cfg.min_size;
    let bbox = Box3D::new(
        [cx, cy, (zmin + zmax) / 2.0],
        h.max(cfg.min_size),
        w.max(cfg.min_size),
        l.max(cfg.min_size),
        normalize_yaw(yaw),
    )?;
    Ok(BoxFit { bbox, degenerate })
}
