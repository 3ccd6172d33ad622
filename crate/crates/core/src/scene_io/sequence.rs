//! Frame sequences and their directory layout.
//!
//! Native layout (written by `emd-motion synth`):
//!
//! ```text
//! <dir>/sequence.toml        cadence, frame count, seed, geodetic origin
//! <dir>/velodyne/000000.bin  one scan per frame
//! <dir>/oxts.txt             one oxts record per frame
//! <dir>/labels.txt           native label format
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene_io::{
    format_labels, parse_kitti_tracking_labels, parse_labels, read_pose_file, read_scan_file,
    write_scan_file, GeoOrigin, ObjectLabel, OxtsRecord, PointCloud, PoseRecord,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub cloud: PointCloud,
    pub pose: PoseRecord,
    pub labels: Vec<ObjectLabel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Frame>,
    pub cadence_hz: f64,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, cadence_hz: f64) -> Result<Self> {
        if !(cadence_hz > 0.0) {
            return Err(Error::Validation("cadence must be positive".into()));
        }
        for w in frames.windows(2) {
            if !(w[1].pose.timestamp > w[0].pose.timestamp) {
                return Err(Error::Validation(format!(
                    "timestamps must increase strictly ({} then {})",
                    w[0].pose.timestamp, w[1].pose.timestamp
                )));
            }
        }
        for f in &frames {
            f.pose.validate()?;
        }
        Ok(Self { frames, cadence_hz })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn labels(&self) -> Vec<ObjectLabel> {
        self.frames.iter().flat_map(|f| f.labels.iter().copied()).collect()
    }
}

/// Contents of `sequence.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceMeta {
    pub cadence_hz: f64,
    pub frames: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub origin_alt: f64,
}

pub fn scan_path(dir: &Path, frame: usize) -> PathBuf {
    dir.join(format!("{frame:06}.bin"))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_sequence(dir: &Path, seq: &FrameSequence, meta: &SequenceMeta) -> Result<()> {
    let velo = dir.join("velodyne");
    std::fs::create_dir_all(&velo).map_err(|e| Error::io(&velo, e))?;
    write_text(
        &dir.join("sequence.toml"),
        &toml::to_string(meta).expect("meta serializes"),
    )?;
    let origin = GeoOrigin::new(OxtsRecord {
        lat: meta.origin_lat,
        lon: meta.origin_lon,
        alt: meta.origin_alt,
        roll: 0.0,
        pitch: 0.0,
        yaw: 0.0,
    });
    let mut oxts = String::new();
    for (i, f) in seq.frames.iter().enumerate() {
        write_scan_file(&scan_path(&velo, i), &f.cloud)?;
        oxts.push_str(&origin.record_for(&f.pose).to_line());
        oxts.push('\n');
    }
    write_text(&dir.join("oxts.txt"), &oxts)?;
    write_text(&dir.join("labels.txt"), &format_labels(&seq.labels()))
}

/// Per-frame scan decoding statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub rejected_points: usize,
}

fn assemble(
    clouds: Vec<PointCloud>,
    poses: Vec<PoseRecord>,
    labels: Vec<ObjectLabel>,
    cadence_hz: f64,
) -> Result<FrameSequence> {
    if poses.len() < clouds.len() {
        return Err(Error::Validation(format!(
            "{} scans but only {} pose records",
            clouds.len(),
            poses.len()
        )));
    }
    let mut frames: Vec<Frame> = clouds
        .into_iter()
        .zip(poses)
        .map(|(cloud, pose)| Frame {
            cloud,
            pose,
            labels: Vec::new(),
        })
        .collect();
    for l in labels {
        if let Some(f) = frames.get_mut(l.frame_index) {
            f.labels.push(l);
        }
    }
    FrameSequence::new(frames, cadence_hz)
}

fn load_scans(dir: &Path, count: Option<usize>) -> Result<(Vec<PointCloud>, LoadReport)> {
    let mut paths: Vec<PathBuf> = match count {
        Some(n) => (0..n).map(|i| scan_path(dir, i)).collect(),
        None => {
            let rd = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
            let mut v: Vec<PathBuf> = rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "bin"))
                .collect();
            v.sort();
            v
        }
    };
    let mut report = LoadReport::default();
    let mut clouds = Vec::with_capacity(paths.len());
    for p in paths.drain(..) {
        let r = read_scan_file(&p)?;
        report.rejected_points += r.rejected;
        clouds.push(r.cloud);
    }
    Ok((clouds, report))
}

/// Reads a native sequence directory.
pub fn read_sequence(dir: &Path) -> Result<(FrameSequence, SequenceMeta, LoadReport)> {
    let meta: SequenceMeta = toml::from_str(&read_text(&dir.join("sequence.toml"))?)
        .map_err(|e| Error::Validation(format!("sequence.toml: {}", e.message())))?;
    let (clouds, report) = load_scans(&dir.join("velodyne"), Some(meta.frames))?;
    let poses = read_pose_file(&read_text(&dir.join("oxts.txt"))?, meta.cadence_hz)?;
    let labels_path = dir.join("labels.txt");
    let labels = if labels_path.exists() {
        parse_labels(&read_text(&labels_path)?)?
    } else {
        Vec::new()
    };
    let seq = assemble(clouds, poses, labels, meta.cadence_hz)?;
    Ok((seq, meta, report))
}

/// Reads a KITTI tracking sequence: a velodyne directory, one oxts file with
/// a line per frame, and optionally a `label_02` file.
pub fn read_kitti_tracking(
    velodyne_dir: &Path,
    oxts_path: &Path,
    labels_path: Option<&Path>,
    cadence_hz: f64,
) -> Result<(FrameSequence, LoadReport)> {
    let (clouds, report) = load_scans(velodyne_dir, None)?;
    let poses = read_pose_file(&read_text(oxts_path)?, cadence_hz)?;
    let labels = match labels_path {
        Some(p) => {
            let mut l = parse_kitti_tracking_labels(&read_text(p)?)?;
            crate::scene_io::mark_moving_by_track(&mut l, &poses, 1.0);
            l
        }
        None => Vec::new(),
    };
    Ok((assemble(clouds, poses, labels, cadence_hz)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::BevConfig;
    use crate::scene_io::{generate_synthetic_scene, SceneSpec};

    #[test]
    fn rejects_non_increasing_timestamps() {
        let f = |t| Frame {
            cloud: PointCloud::default(),
            pose: PoseRecord::identity(t),
            labels: vec![],
        };
        assert!(FrameSequence::new(vec![f(0.0), f(0.0)], 10.0).is_err());
        assert!(FrameSequence::new(vec![f(0.0), f(0.1)], 10.0).is_ok());
    }

    #[test]
    fn write_then_read_native_dir() {
        let spec = SceneSpec::from_toml(
            "seed = 1\nframes = 3\n[ego]\nspeed = 4.0\nyaw_rate = 0.1\n\
             [[mover]]\ncategory = \"car\"\ncenter = [12.0, 3.0]\nsize = [1.5, 1.6, 3.9]\n\
             velocity = [3.0, 0.0]\ndensity = 50.0\n",
        )
        .unwrap();
        let s = generate_synthetic_scene(&spec, &BevConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let meta = SequenceMeta {
            cadence_hz: 10.0,
            frames: 3,
            seed: Some(1),
            origin_lat: 49.0,
            origin_lon: 8.4,
            origin_alt: 110.0,
        };
        write_sequence(dir.path(), &s.sequence, &meta).unwrap();
        let (back, m, rep) = read_sequence(dir.path()).unwrap();
        assert_eq!(m, meta);
        assert_eq!(rep.rejected_points, 0);
        assert_eq!(back.len(), 3);
        for (a, b) in back.frames.iter().zip(&s.sequence.frames) {
            assert_eq!(a.labels, b.labels);
            assert_eq!(a.cloud.len(), b.cloud.len());
            assert!((a.pose.transform - b.pose.transform).amax() < 1e-6);
            assert!((a.pose.timestamp - b.pose.timestamp).abs() < 1e-12);
        }
    }
}
