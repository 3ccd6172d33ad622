use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Oriented 3D box in the Lidar frame.
///
/// `center` is the geometric center. `l` runs along the heading `yaw`, `w`
/// across it, `h` vertically. Rectangles repeat every half turn, so yaw is
/// kept in `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3D {
    pub center: [f64; 3],
    pub h: f64,
    pub w: f64,
    pub l: f64,
    pub yaw: f64,
}

/// Wraps an angle into `[0, pi)`.
pub fn normalize_yaw(yaw: f64) -> f64 {
    let y = yaw.rem_euclid(PI);
    if y >= PI {
        0.0
    } else {
        y
    }
}

impl Box3D {
    pub fn new(center: [f64; 3], h: f64, w: f64, l: f64, yaw: f64) -> Result<Self> {
        if !(h > 0.0 && w > 0.0 && l > 0.0) {
            return Err(Error::Validation(format!(
                "box dimensions must be positive, got h={h} w={w} l={l}"
            )));
        }
        if !center.iter().all(|v| v.is_finite()) || !yaw.is_finite() {
            return Err(Error::Validation("box center and yaw must be finite".into()));
        }
        Ok(Self {
            center,
            h,
            w,
            l,
            yaw: normalize_yaw(yaw),
        })
    }

    /// BEV footprint corners, counter-clockwise.
    pub fn bev_corners(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.yaw.sin_cos();
        let (hl, hw) = (self.l / 2.0, self.w / 2.0);
        let local = [[hl, -hw], [hl, hw], [-hl, hw], [-hl, -hw]];
        let mut out = [[0.0; 2]; 4];
        for (slot, [u, v]) in out.iter_mut().zip(local) {
            *slot = [
                self.center[0] + c * u - s * v,
                self.center[1] + s * u + c * v,
            ];
        }
        out
    }

    pub fn bev_area(&self) -> f64 {
        self.l * self.w
    }

    pub fn volume(&self) -> f64 {
        self.l * self.w * self.h
    }

    pub fn z_range(&self) -> (f64, f64) {
        (self.center[2] - self.h / 2.0, self.center[2] + self.h / 2.0)
    }

    /// True if the BEV point lies inside the footprint.
    pub fn contains_bev(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.yaw.sin_cos();
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        u.abs() <= self.l / 2.0 && v.abs() <= self.w / 2.0
    }

    /// All eight corners (bottom face first).
    pub fn corners(&self) -> [[f64; 3]; 8] {
        let bev = self.bev_corners();
        let (z0, z1) = self.z_range();
        let mut out = [[0.0; 3]; 8];
        for (i, p) in bev.iter().enumerate() {
            out[i] = [p[0], p[1], z0];
            out[i + 4] = [p[0], p[1], z1];
        }
        out
    }

    pub fn bev_distance_from_origin(&self) -> f64 {
        self.center[0].hypot(self.center[1])
    }
}
