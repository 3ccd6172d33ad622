//! Camera calibration for the image-plane view.

use nalgebra::{Matrix3, Matrix3x4, Vector3, Vector4};

use crate::boxfit::Box3D;
use crate::error::{Error, Result};

/// Axis-aligned image rectangle `[u0, v0, u1, v1]` in pixels.
pub type ImageBox = [f64; 4];

/// KITTI-style calibration: Lidar to rectified camera, then projection.
#[derive(Debug, Clone, PartialEq)]
pub struct KittiCalib {
    pub p2: Matrix3x4<f64>,
    pub r0_rect: Matrix3<f64>,
    pub velo_to_cam: Matrix3x4<f64>,
    pub image_width: f64,
    pub image_height: f64,
}

fn parse_values(line: usize, s: &str, n: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::MalformedLine { line, reason: e.to_string() })?;
    if v.len() != n {
        return Err(Error::MalformedLine {
            line,
            reason: format!("expected {n} values, found {}", v.len()),
        });
    }
    Ok(v)
}

impl KittiCalib {
    /// Parses a calibration file holding `P2`, `R0_rect` (or `R_rect`) and
    /// `Tr_velo_to_cam` (or `Tr_velo_cam`), as in the object and tracking
    /// benchmarks. The image size defaults to 1242 x 375.
    pub fn parse(text: &str) -> Result<Self> {
        let (mut p2, mut r0, mut tr) = (None, None, None);
        for (i, line) in text.lines().enumerate() {
            let Some((key, rest)) = line.split_once(|c: char| c == ':' || c.is_whitespace()) else {
                continue;
            };
            match key.trim() {
                "P2" => p2 = Some(Matrix3x4::from_row_slice(&parse_values(i + 1, rest, 12)?)),
                "R0_rect" | "R_rect" => r0 = Some(Matrix3::from_row_slice(&parse_values(i + 1, rest, 9)?)),
                "Tr_velo_to_cam" | "Tr_velo_cam" => {
                    tr = Some(Matrix3x4::from_row_slice(&parse_values(i + 1, rest, 12)?))
                }
                _ => {}
            }
        }
        let missing = |k: &str| Error::Validation(format!("calibration is missing {k}"));
        Ok(Self {
            p2: p2.ok_or_else(|| missing("P2"))?,
            r0_rect: r0.ok_or_else(|| missing("R0_rect"))?,
            velo_to_cam: tr.ok_or_else(|| missing("Tr_velo_to_cam"))?,
            image_width: 1242.0,
            image_height: 375.0,
        })
    }

    /// Rectified camera coordinates of a Lidar point.
    pub fn to_camera(&self, p: [f64; 3]) -> Vector3<f64> {
        self.r0_rect * (self.velo_to_cam * Vector4::new(p[0], p[1], p[2], 1.0))
    }

    /// Image rectangle of the box clipped to the image, or `None` when the
    /// box is behind the camera or outside the field of view.
    pub fn project_box(&self, b: &Box3D) -> Option<ImageBox> {
        let mut r = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for c in b.corners() {
            let cam = self.to_camera(c);
            if cam.z <= 0.1 {
                return None;
            }
            let uvw = self.p2 * Vector4::new(cam.x, cam.y, cam.z, 1.0);
            let (u, v) = (uvw.x / uvw.z, uvw.y / uvw.z);
            r = [r[0].min(u), r[1].min(v), r[2].max(u), r[3].max(v)];
        }
        let clipped = [
            r[0].max(0.0),
            r[1].max(0.0),
            r[2].min(self.image_width),
            r[3].min(self.image_height),
        ];
        (clipped[2] > clipped[0] && clipped[3] > clipped[1]).then_some(clipped)
    }
}

pub fn image_iou(a: &ImageBox, b: &ImageBox) -> f64 {
    let w = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let h = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    let inter = w * h;
    let area = |x: &ImageBox| (x[2] - x[0]) * (x[3] - x[1]);
    let union = area(a) + area(b) - inter;
    if union > 0.0 { (inter / union).clamp(0.0, 1.0) } else { 0.0 }
}
