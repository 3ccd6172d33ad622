//! Detection records.
//!
//! One detection per line, whitespace separated:
//!
//! ```text
//! frame category cx cy cz h w l yaw speed
//! ```
//!
//! An optional `# frames: first..last` header names the processed frame
//! range (inclusive), so frames without detections are distinguishable from
//! frames that were never processed.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use crate::boxfit::Box3D;
use crate::error::{Error, Result};
use crate::scene_io::Category;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub frame_index: usize,
    pub category: Category,
    pub bbox: Box3D,
    /// Ground speed in m/s.
    pub speed: f64,
}

impl Detection {
    pub fn to_line(&self) -> String {
        let b = &self.bbox;
        format!(
            "{} {} {} {} {} {} {} {} {} {}",
            self.frame_index,
            self.category,
            b.center[0],
            b.center[1],
            b.center[2],
            b.h,
            b.w,
            b.l,
            b.yaw,
            self.speed
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionFile {
    pub frames: Option<RangeInclusive<usize>>,
    pub detections: Vec<Detection>,
}

pub fn format_detections(file: &DetectionFile) -> String {
    let mut s = String::new();
    if let Some(r) = &file.frames {
        let _ = writeln!(s, "# frames: {}..{}", r.start(), r.end());
    }
    s.push_str("# frame category cx cy cz h w l yaw speed\n");
    for d in &file.detections {
        s.push_str(&d.to_line());
        s.push('\n');
    }
    s
}

pub fn parse_detections(text: &str) -> Result<DetectionFile> {
    let mut out = DetectionFile::default();
    for (i, line) in text.lines().enumerate() {
        let bad = |reason: String| Error::MalformedLine { line: i + 1, reason };
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("# frames:") {
            let (a, b) = rest
                .trim()
                .split_once("..")
                .ok_or_else(|| bad(format!("bad frame range {rest:?}")))?;
            let a: usize = a.trim().parse().map_err(|e| bad(format!("frame range: {e}")))?;
            let b: usize = b.trim().parse().map_err(|e| bad(format!("frame range: {e}")))?;
            out.frames = Some(a..=b);
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 10 {
            return Err(bad(format!("expected 10 fields, found {}", t.len())));
        }
        let num = |k: usize| -> Result<f64> {
            t[k].parse::<f64>()
                .map_err(|e| bad(format!("field {k}: {e}")))
                .and_then(|v| if v.is_finite() { Ok(v) } else { Err(bad(format!("field {k} is not finite"))) })
        };
        let frame_index = t[0].parse().map_err(|e| bad(format!("field 0: {e}")))?;
        let category = t[1].parse().map_err(|e: Error| bad(format!("field 1: {e}")))?;
        let bbox = Box3D::new([num(2)?, num(3)?, num(4)?], num(5)?, num(6)?, num(7)?, num(8)?)
            .map_err(|e| bad(e.to_string()))?;
        out.detections.push(Detection {
            frame_index,
            category,
            bbox,
            speed: num(9)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let d = Detection {
            frame_index: 4,
            category: Category::Cyclist,
            bbox: Box3D::new([1.0 / 3.0, -2.5, 0.1], 1.7, 0.6, 1.8, 0.7).unwrap(),
            speed: 5.123456789,
        };
        let file = DetectionFile {
            frames: Some(2..=9),
            detections: vec![d],
        };
        let text = format_detections(&file);
        let back = parse_detections(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(format_detections(&back), text);
    }

    #[test]
    fn bad_lines_report_line_numbers() {
        match parse_detections("# c\n1 car 0 0 0 1 1 1 0\n") {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
