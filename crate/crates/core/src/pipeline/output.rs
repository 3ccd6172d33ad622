//! Loading run inputs and writing run outputs.
//!
//! A detection run writes into its output directory:
//!
//! ```text
//! config.toml       effective configuration
//! detections.txt    detection records
//! proposals.txt     proposal records, indexing into proposals.bin
//! proposals.bin     proposal points, 16-byte records
//! manifest.toml     config hash, frame range, per-frame evaluation counts
//! timings.toml      per-stage wall times
//! fields/NNNNNN.csv and .ppm (with runtime.export_fields)
//! ```
//!
//! The manifest holds only deterministic quantities, so two identical runs
//! produce identical manifests; wall times live in `timings.toml`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::emd::{field_to_csv, field_to_ppm, DetectionStats, SearchMode};
use crate::error::{Error, Result};
use crate::eval::{distance_csv, format_detections, format_table, metrics_csv, DetectionFile, KittiCalib};
use crate::fusion::write_proposals;
use crate::pipeline::{Evaluation, InputConfig, PipelineConfig, SequenceRun};
use crate::preprocess::BevConfig;
use crate::scene_io::{
    generate_synthetic_scene, mark_moving_by_track, parse_kitti_tracking_labels, parse_labels,
    read_kitti_tracking, read_pose_file, read_sequence, write_sequence, FrameSequence,
    ObjectLabel, SceneSpec, SequenceMeta, SyntheticSequence,
};

/// KITTI tracks faster than this (m/s) count as moving.
pub const KITTI_MOVING_SPEED: f64 = 1.0;

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct LoadedInput {
    pub sequence: FrameSequence,
    /// Generator seed of a synthetic sequence.
    pub seed: Option<u64>,
    pub calib: Option<KittiCalib>,
    pub rejected_points: usize,
}

fn load_calib(input: &InputConfig) -> Result<Option<KittiCalib>> {
    match input.kitti.as_ref().and_then(|k| k.calib.as_ref()) {
        Some(p) => Ok(Some(KittiCalib::parse(&read_text(p)?)?)),
        None => Ok(None),
    }
}

/// Reads the configured sequence. Exactly one source must be set.
pub fn load_input(input: &InputConfig) -> Result<LoadedInput> {
    match (&input.sequence, &input.kitti) {
        (Some(dir), None) => {
            let (sequence, meta, report) = read_sequence(dir)?;
            Ok(LoadedInput {
                sequence,
                seed: meta.seed,
                calib: None,
                rejected_points: report.rejected_points,
            })
        }
        (None, Some(k)) => {
            let (sequence, report) =
                read_kitti_tracking(&k.velodyne, &k.oxts, k.labels.as_deref(), k.cadence_hz)?;
            Ok(LoadedInput {
                sequence,
                seed: None,
                calib: load_calib(input)?,
                rejected_points: report.rejected_points,
            })
        }
        (None, None) => Err(Error::Config("input: set either `sequence` or `kitti`".into())),
        (Some(_), Some(_)) => Err(Error::Config("input: `sequence` and `kitti` are exclusive".into())),
    }
}

/// Ground-truth labels and calibration of the configured input, without
/// reading any scans.
pub fn load_labels(input: &InputConfig) -> Result<(Vec<ObjectLabel>, Option<KittiCalib>)> {
    match (&input.sequence, &input.kitti) {
        (Some(dir), None) => Ok((parse_labels(&read_text(&dir.join("labels.txt"))?)?, None)),
        (None, Some(k)) => {
            let path = k
                .labels
                .as_ref()
                .ok_or_else(|| Error::Config("input.kitti.labels is required for eval".into()))?;
            let mut labels = parse_kitti_tracking_labels(&read_text(path)?)?;
            let poses = read_pose_file(&read_text(&k.oxts)?, k.cadence_hz)?;
            mark_moving_by_track(&mut labels, &poses, KITTI_MOVING_SPEED);
            Ok((labels, load_calib(input)?))
        }
        (None, None) => Err(Error::Config("input: set either `sequence` or `kitti`".into())),
        (Some(_), Some(_)) => Err(Error::Config("input: `sequence` and `kitti` are exclusive".into())),
    }
}

/// Generates `spec` and writes it as a native sequence directory, together
/// with the spec itself as `scene.toml`.
pub fn write_synthetic(dir: &Path, spec: &SceneSpec, extent: &BevConfig) -> Result<SyntheticSequence> {
    let syn = generate_synthetic_scene(spec, extent)?;
    let meta = SequenceMeta {
        cadence_hz: spec.cadence_hz,
        frames: spec.frames,
        seed: Some(spec.seed),
        origin_lat: spec.geodetic_origin.lat,
        origin_lon: spec.geodetic_origin.lon,
        origin_alt: spec.geodetic_origin.alt,
    };
    create_dir(dir)?;
    write_sequence(dir, &syn.sequence, &meta)?;
    write_text(&dir.join("scene.toml"), &spec.to_toml())?;
    Ok(syn)
}

#[derive(Serialize)]
struct Counts {
    occupied_cells: u64,
    rough_cells: u64,
    degenerate_cells: u64,
    candidate_cells: u64,
    moving_cells: u64,
    fast_evaluations: u64,
    energy_evaluations: u64,
}

impl From<DetectionStats> for Counts {
    fn from(s: DetectionStats) -> Self {
        Self {
            occupied_cells: s.occupied_cells,
            rough_cells: s.rough_cells,
            degenerate_cells: s.degenerate_cells,
            candidate_cells: s.candidate_cells,
            moving_cells: s.moving_cells,
            fast_evaluations: s.fast_evaluations,
            energy_evaluations: s.energy_evaluations,
        }
    }
}

#[derive(Serialize)]
struct FrameEntry {
    frame: usize,
    detections: usize,
    proposals: usize,
    empty_proposals: usize,
    #[serde(flatten)]
    counts: Counts,
}

#[derive(Serialize)]
struct Failure {
    frame: usize,
    error: String,
}

#[derive(Serialize)]
struct Manifest {
    config_hash: String,
    search_mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    first_frame: usize,
    last_frame: usize,
    detections: usize,
    totals: Counts,
    frame: Vec<FrameEntry>,
    failure: Vec<Failure>,
}

pub fn search_mode(cfg: &PipelineConfig) -> SearchMode {
    if cfg.runtime.exhaustive {
        SearchMode::Exhaustive
    } else {
        SearchMode::CoarseToFine
    }
}

/// Deterministic run summary.
pub fn manifest_toml(run: &SequenceRun, cfg: &PipelineConfig, seed: Option<u64>) -> String {
    let m = Manifest {
        config_hash: cfg.hash(),
        search_mode: match search_mode(cfg) {
            SearchMode::CoarseToFine => "coarse_to_fine",
            SearchMode::Exhaustive => "exhaustive",
        },
        seed,
        first_frame: *run.frames.start(),
        last_frame: *run.frames.end(),
        detections: run.results.iter().map(|r| r.detections.len()).sum(),
        totals: run.stats().into(),
        frame: run
            .results
            .iter()
            .map(|r| FrameEntry {
                frame: r.frame_index,
                detections: r.detections.len(),
                proposals: r.proposals.len(),
                empty_proposals: r.empty_proposals,
                counts: r.stats.into(),
            })
            .collect(),
        failure: run
            .failures
            .iter()
            .map(|(frame, error)| Failure {
                frame: *frame,
                error: error.clone(),
            })
            .collect(),
    };
    toml::to_string(&m).expect("manifest serializes")
}

/// Per-stage wall times in milliseconds, total and per frame.
pub fn timings_toml(run: &SequenceRun) -> String {
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    let mut s = String::new();
    let t = run.times();
    let _ = writeln!(s, "[total]");
    let _ = writeln!(s, "preprocess_ms = {}", ms(t.preprocess));
    let _ = writeln!(s, "detect_ms = {}", ms(t.detect));
    let _ = writeln!(s, "fuse_cluster_ms = {}", ms(t.fuse_cluster));
    let _ = writeln!(s, "fit_ms = {}", ms(t.fit));
    for r in &run.results {
        let t = r.times;
        let _ = writeln!(s, "\n[[frame]]\nframe = {}", r.frame_index);
        let _ = writeln!(s, "preprocess_ms = {}", ms(t.preprocess));
        let _ = writeln!(s, "detect_ms = {}", ms(t.detect));
        let _ = writeln!(s, "fuse_cluster_ms = {}", ms(t.fuse_cluster));
        let _ = writeln!(s, "fit_ms = {}", ms(t.fit));
    }
    s
}

pub fn detection_file(run: &SequenceRun) -> DetectionFile {
    DetectionFile {
        frames: Some(run.frames.clone()),
        detections: run.detections(),
    }
}

/// Writes every output of a detection run into `dir`.
pub fn write_detect_outputs(dir: &Path, run: &SequenceRun, cfg: &PipelineConfig, seed: Option<u64>) -> Result<()> {
    create_dir(dir)?;
    write_text(&dir.join("config.toml"), &cfg.to_toml())?;
    write_text(&dir.join("detections.txt"), &format_detections(&detection_file(run)))?;
    let proposals: Vec<_> = run.results.iter().flat_map(|r| r.proposals.iter().cloned()).collect();
    let (text, blob) = write_proposals(&proposals);
    write_text(&dir.join("proposals.txt"), &text)?;
    let bin = dir.join("proposals.bin");
    std::fs::write(&bin, blob).map_err(|e| Error::io(&bin, e))?;
    write_text(&dir.join("manifest.toml"), &manifest_toml(run, cfg, seed))?;
    write_text(&dir.join("timings.toml"), &timings_toml(run))?;
    if cfg.runtime.export_fields {
        let fields = dir.join("fields");
        create_dir(&fields)?;
        let max = cfg.search.max_distance as f64;
        for r in &run.results {
            let stem = fields.join(format!("{:06}", r.frame_index));
            write_text(&stem.with_extension("csv"), &field_to_csv(&r.fused))?;
            let ppm = stem.with_extension("ppm");
            std::fs::write(&ppm, field_to_ppm(&r.fused, max)).map_err(|e| Error::io(&ppm, e))?;
        }
    }
    Ok(())
}

/// Writes `metrics.txt` (table), `metrics.csv` and one distance CSV per
/// view into `dir`, and returns the table.
pub fn write_eval_outputs(dir: &Path, eval: &Evaluation) -> Result<String> {
    create_dir(dir)?;
    let unavailable: Vec<&str> = eval.unavailable.iter().map(|v| v.as_str()).collect();
    let table = format_table(&eval.reports, &unavailable);
    write_text(&dir.join("metrics.txt"), &table)?;
    write_text(&dir.join("metrics.csv"), &metrics_csv(&eval.reports))?;
    for r in &eval.reports {
        write_text(&dir.join(format!("distance_{}.csv", r.view.as_str())), &distance_csv(r))?;
    }
    Ok(table)
}
