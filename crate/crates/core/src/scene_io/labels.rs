//! Ground-truth object labels.
//!
//! Native format, one object per line, whitespace separated:
//!
//! ```text
//! frame track_id category h w l cx cy cz yaw is_moving
//! ```
//!
//! Coordinates are in the Lidar frame of `frame`; `is_moving` is `0` or `1`.
//! Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use crate::boxfit::Box3D;
use crate::error::{Error, Result};
use crate::scene_io::PoseRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Car,
    Pedestrian,
    Cyclist,
    Other,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Car,
        Category::Pedestrian,
        Category::Cyclist,
        Category::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Car => "car",
            Category::Pedestrian => "pedestrian",
            Category::Cyclist => "cyclist",
            Category::Other => "other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "car" => Ok(Category::Car),
            "pedestrian" => Ok(Category::Pedestrian),
            "cyclist" => Ok(Category::Cyclist),
            "other" => Ok(Category::Other),
            _ => Err(Error::Validation(format!("unknown category {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectLabel {
    pub frame_index: usize,
    pub category: Category,
    pub bbox: Box3D,
    pub track_id: i64,
    pub is_moving: bool,
}

impl ObjectLabel {
    pub fn to_line(&self) -> String {
        let b = &self.bbox;
        format!(
            "{} {} {} {} {} {} {} {} {} {} {}",
            self.frame_index,
            self.track_id,
            self.category,
            b.h,
            b.w,
            b.l,
            b.center[0],
            b.center[1],
            b.center[2],
            b.yaw,
            u8::from(self.is_moving)
        )
    }
}

fn field<T: FromStr>(tokens: &[&str], idx: usize, line: usize) -> Result<T> {
    let tok = tokens.get(idx).ok_or_else(|| Error::MalformedLine {
        line,
        reason: format!("missing field {idx}"),
    })?;
    tok.parse().map_err(|_| Error::MalformedLine {
        line,
        reason: format!("cannot parse field {idx} ({tok:?})"),
    })
}

pub fn parse_labels(text: &str) -> Result<Vec<ObjectLabel>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = i + 1;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 11 {
            return Err(Error::MalformedLine {
                line: lineno,
                reason: format!("expected 11 fields, found {}", t.len()),
            });
        }
        let category: Category = t[2].parse().map_err(|e: Error| Error::MalformedLine {
            line: lineno,
            reason: e.to_string(),
        })?;
        let nums: Vec<f64> = (3..10)
            .map(|k| field::<f64>(&t, k, lineno))
            .collect::<Result<_>>()?;
        let moving: u8 = field(&t, 10, lineno)?;
        if moving > 1 {
            return Err(Error::MalformedLine {
                line: lineno,
                reason: "is_moving must be 0 or 1".into(),
            });
        }
        let bbox = Box3D::new([nums[3], nums[4], nums[5]], nums[0], nums[1], nums[2], nums[6])
            .map_err(|e| Error::MalformedLine {
                line: lineno,
                reason: e.to_string(),
            })?;
        out.push(ObjectLabel {
            frame_index: field(&t, 0, lineno)?,
            track_id: field(&t, 1, lineno)?,
            category,
            bbox,
            is_moving: moving == 1,
        });
    }
    Ok(out)
}

pub fn format_labels(labels: &[ObjectLabel]) -> String {
    let mut s = String::from("# frame track_id category h w l cx cy cz yaw is_moving\n");
    for l in labels {
        s.push_str(&l.to_line());
        s.push('\n');
    }
    s
}

/// Reads KITTI tracking `label_02` text.
///
/// Boxes are moved from the camera frame to the Lidar frame with the nominal
/// axis permutation (`x_l = z_c`, `y_l = -x_c`, `z_l = -y_c`), ignoring the
/// few-centimeter calibration offset. `DontCare` rows are skipped. Motion
/// flags start `false`; see [`mark_moving_by_track`].
pub fn parse_kitti_tracking_labels(text: &str) -> Result<Vec<ObjectLabel>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() < 17 {
            return Err(Error::MalformedLine {
                line: lineno,
                reason: format!("KITTI tracking rows need 17 fields, found {}", t.len()),
            });
        }
        let category = match t[2] {
            "DontCare" => continue,
            "Car" | "Van" => Category::Car,
            "Pedestrian" | "Person_sitting" => Category::Pedestrian,
            "Cyclist" => Category::Cyclist,
            _ => Category::Other,
        };
        let v: Vec<f64> = (10..17)
            .map(|k| field::<f64>(&t, k, lineno))
            .collect::<Result<_>>()?;
        let (h, w, l) = (v[0], v[1], v[2]);
        let (xc, yc, zc, ry) = (v[3], v[4], v[5], v[6]);
        let center = [zc, -xc, -yc + h / 2.0];
        let bbox = Box3D::new(center, h, w, l, -ry - PI / 2.0).map_err(|e| {
            Error::MalformedLine {
                line: lineno,
                reason: e.to_string(),
            }
        })?;
        out.push(ObjectLabel {
            frame_index: field(&t, 0, lineno)?,
            track_id: field(&t, 1, lineno)?,
            category,
            bbox,
            is_moving: false,
        });
    }
    Ok(out)
}

/// Flags a label as moving when its track's Earth-frame speed, measured
/// against the nearest other observation of the same track, exceeds
/// `min_speed` (m/s).
pub fn mark_moving_by_track(labels: &mut [ObjectLabel], poses: &[PoseRecord], min_speed: f64) {
    let mut tracks: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        if l.frame_index < poses.len() {
            tracks.entry(l.track_id).or_default().push(i);
        }
    }
    let world = |l: &ObjectLabel| {
        let p = poses[l.frame_index].transform
            * Vector4::new(l.bbox.center[0], l.bbox.center[1], l.bbox.center[2], 1.0);
        (p.x, p.y, poses[l.frame_index].timestamp)
    };
    for members in tracks.values() {
        let mut members = members.clone();
        members.sort_by_key(|&i| labels[i].frame_index);
        for (k, &i) in members.iter().enumerate() {
            let neighbor = if k + 1 < members.len() {
                members[k + 1]
            } else if k > 0 {
                members[k - 1]
            } else {
                continue;
            };
            let (x0, y0, t0) = world(&labels[i]);
            let (x1, y1, t1) = world(&labels[neighbor]);
            let dt = (t1 - t0).abs();
            if dt > 0.0 {
                labels[i].is_moving = (x1 - x0).hypot(y1 - y0) / dt > min_speed;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<ObjectLabel> {
        vec![
            ObjectLabel {
                frame_index: 3,
                category: Category::Car,
                bbox: Box3D::new([12.25, -3.5, -0.98], 1.5, 1.6, 3.9, 0.1).unwrap(),
                track_id: 7,
                is_moving: true,
            },
            ObjectLabel {
                frame_index: 3,
                category: Category::Pedestrian,
                bbox: Box3D::new([5.0, 4.0, -0.8], 1.75, 0.6, 0.8, 2.0).unwrap(),
                track_id: 9,
                is_moving: false,
            },
        ]
    }

    #[test]
    fn round_trip_text_and_values() {
        let text = format_labels(&sample());
        let parsed = parse_labels(&text).unwrap();
        assert_eq!(parsed, sample());
        assert_eq!(format_labels(&parsed), text);
    }

    #[test]
    fn wrong_field_count_names_line() {
        let err = parse_labels("# c\n1 2 car 1 1 1 0 0 0 0\n").unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 2, .. }));
    }

    #[test]
    fn kitti_conversion_axes() {
        let row = "0 1 Car 0 0 -1.57 100 100 200 200 1.5 1.6 3.9 -2.0 1.7 15.0 -1.5707963267948966";
        let l = &parse_kitti_tracking_labels(row).unwrap()[0];
        assert_eq!(l.category, Category::Car);
        assert!((l.bbox.center[0] - 15.0).abs() < 1e-12);
        assert!((l.bbox.center[1] - 2.0).abs() < 1e-12);
        assert!((l.bbox.center[2] - (-1.7 + 0.75)).abs() < 1e-12);
        // rotation_y = -pi/2 faces along camera +z, i.e. Lidar +x.
        assert!(l.bbox.yaw.abs() < 1e-9 || (l.bbox.yaw - PI).abs() < 1e-9);
        let dc = "0 -1 DontCare -1 -1 -10 1 1 2 2 -1 -1 -1 -1000 -1000 -1000 -10";
        assert!(parse_kitti_tracking_labels(dc).unwrap().is_empty());
    }

    #[test]
    fn moving_flag_from_track_speed() {
        let poses: Vec<_> = (0..3)
            .map(|i| PoseRecord::planar(i as f64 * 0.1, i as f64, 0.0, 0.0, 0.0))
            .collect();
        // Object fixed in the Earth frame: sensor moves +1 m per frame.
        let mut labels: Vec<_> = (0..3)
            .map(|i| ObjectLabel {
                frame_index: i,
                category: Category::Car,
                bbox: Box3D::new([10.0 - i as f64, 0.0, 0.0], 1.0, 1.0, 1.0, 0.0).unwrap(),
                track_id: 1,
                is_moving: true,
            })
            .collect();
        mark_moving_by_track(&mut labels, &poses, 0.5);
        assert!(labels.iter().all(|l| !l.is_moving));
    }
}
