//! KITTI velodyne scan layout: consecutive little-endian `f32` quadruples
//! `(x, y, z, intensity)`, 16 bytes per point.

use std::path::Path;

use crate::error::{Error, Result};

pub const RECORD_BYTES: usize = 16;

/// One Lidar return. Coordinates are kept in `f64` so that rigid transforms
/// chain without `f32` round-off; the on-disk format stores `f32`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub intensity: f64,
}

impl Point {
    pub fn new(x: f64, y: f64, z: f64, intensity: f64) -> Self {
        Self { x, y, z, intensity }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }
}

impl FromIterator<Point> for PointCloud {
    fn from_iter<I: IntoIterator<Item = Point>>(iter: I) -> Self {
        Self {
            points: iter.into_iter().collect(),
        }
    }
}

/// Result of decoding a scan blob.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRead {
    pub cloud: PointCloud,
    /// Records dropped because a field was NaN or infinite.
    pub rejected: usize,
}

pub fn read_point_cloud(bytes: &[u8]) -> Result<ScanRead> {
    if bytes.len() % RECORD_BYTES != 0 {
        let offset = bytes.len() - bytes.len() % RECORD_BYTES;
        return Err(Error::MalformedBytes {
            offset,
            reason: format!(
                "scan length {} is not a multiple of {RECORD_BYTES}",
                bytes.len()
            ),
        });
    }
    let mut points = Vec::with_capacity(bytes.len() / RECORD_BYTES);
    let mut rejected = 0;
    for (i, rec) in bytes.chunks_exact(RECORD_BYTES).enumerate() {
        let mut v = [0f32; 4];
        for (k, slot) in v.iter_mut().enumerate() {
            let b: [u8; 4] = rec[4 * k..4 * k + 4].try_into().unwrap();
            *slot = f32::from_le_bytes(b);
        }
        if v.iter().any(|f| !f.is_finite()) {
            log::warn!(
                "rejecting non-finite scan record at byte offset {}",
                i * RECORD_BYTES
            );
            rejected += 1;
            continue;
        }
        points.push(Point {
            x: v[0] as f64,
            y: v[1] as f64,
            z: v[2] as f64,
            intensity: (v[3] as f64).clamp(0.0, 1.0),
        });
    }
    Ok(ScanRead {
        cloud: PointCloud { points },
        rejected,
    })
}

/// Encodes a cloud, narrowing every field to `f32`.
pub fn write_point_cloud(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.len() * RECORD_BYTES);
    for p in &cloud.points {
        for v in [p.x, p.y, p.z, p.intensity] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn read_scan_file(path: &Path) -> Result<ScanRead> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_point_cloud(&bytes)
}

pub fn write_scan_file(path: &Path, cloud: &PointCloud) -> Result<()> {
    std::fs::write(path, write_point_cloud(cloud)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_blob_is_empty_cloud() {
        let r = read_point_cloud(&[]).unwrap();
        assert!(r.cloud.is_empty());
        assert_eq!(r.rejected, 0);
    }

    #[test]
    fn single_record() {
        let mut b = Vec::new();
        for v in [1.0f32, 2.0, 3.0, 0.5] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        let r = read_point_cloud(&b).unwrap();
        assert_eq!(r.cloud.points, vec![Point::new(1.0, 2.0, 3.0, 0.5)]);
    }

    #[test]
    fn bad_length_names_offset() {
        let err = read_point_cloud(&[0u8; 35]).unwrap_err();
        match err {
            Error::MalformedBytes { offset, .. } => assert_eq!(offset, 32),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_records_are_counted_not_fatal() {
        let mut b = Vec::new();
        for v in [1.0f32, f32::NAN, 3.0, 0.5, 4.0, 5.0, 6.0, 0.1] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        let r = read_point_cloud(&b).unwrap();
        assert_eq!(r.rejected, 1);
        assert_eq!(r.cloud.len(), 1);
        assert_eq!(r.cloud.points[0].x, 4.0);
    }

    #[test]
    fn intensity_clamped() {
        let mut b = Vec::new();
        for v in [0.0f32, 0.0, 0.0, 7.0] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(read_point_cloud(&b).unwrap().cloud.points[0].intensity, 1.0);
    }

    proptest! {
        #[test]
        fn write_then_read_is_bit_exact(raw in prop::collection::vec(
            (-1e4f32..1e4, -1e4f32..1e4, -1e3f32..1e3, 0f32..=1.0), 0..64)
        ) {
            let cloud: PointCloud = raw
                .iter()
                .map(|&(x, y, z, i)| Point::new(x as f64, y as f64, z as f64, i as f64))
                .collect();
            let bytes = write_point_cloud(&cloud);
            prop_assert_eq!(bytes.len(), cloud.len() * RECORD_BYTES);
            let back = read_point_cloud(&bytes).unwrap();
            prop_assert_eq!(&back.cloud, &cloud);
            prop_assert_eq!(write_point_cloud(&back.cloud), bytes);
        }
    }
}
