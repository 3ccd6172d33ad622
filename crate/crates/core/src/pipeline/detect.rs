//! Per-frame orchestration: history compensation, detection per frame pair,
//! fusion, clustering, proposals and box fitting.

use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use crate::boxfit::{classify_by_size, estimate_center, fit_box};
use crate::emd::{DetectionStats, LowPassState, MotionDetector, MotionField, SearchMode};
use crate::error::{Error, Result};
use crate::eval::Detection;
use crate::fusion::{cluster_objects, extract_proposal_points, fuse_multiframe, FusionConfig, Proposal};
use crate::pipeline::PipelineConfig;
use crate::preprocess::{compensate_ego_motion, remove_ground, voxelize_bev, BevMaps};
use crate::scene_io::{FrameSequence, PointCloud};

/// Wall time spent per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimes {
    pub preprocess: Duration,
    pub detect: Duration,
    pub fuse_cluster: Duration,
    pub fit: Duration,
}

impl std::ops::AddAssign for StageTimes {
    fn add_assign(&mut self, o: Self) {
        self.preprocess += o.preprocess;
        self.detect += o.detect;
        self.fuse_cluster += o.fuse_cluster;
        self.fit += o.fit;
    }
}

/// Motion fields of one frame against each earlier frame, before fusion.
#[derive(Debug, Clone)]
pub struct PairFields {
    pub frame_index: usize,
    /// `fields[k - 1]` compares frame `t` with frame `t - k`.
    pub fields: Vec<MotionField>,
    pub stats: Vec<DetectionStats>,
    /// The current frame's ground-removed cloud.
    pub cloud: PointCloud,
    pub maps: BevMaps,
    /// `previous[k - 1]` is frame `t - k` compensated into frame `t`.
    pub previous: Vec<BevMaps>,
}

#[derive(Debug, Clone)]
pub struct FrameResult {
    pub frame_index: usize,
    pub detections: Vec<Detection>,
    pub proposals: Vec<Proposal>,
    pub fused: MotionField,
    pub stats: DetectionStats,
    /// Clusters whose footprint held no points.
    pub empty_proposals: usize,
    pub times: StageTimes,
}

/// Detection pipeline over one sequence. Ground-removed clouds are cached,
/// so frames should be visited in increasing order.
pub struct Pipeline<'a> {
    cfg: &'a PipelineConfig,
    seq: &'a FrameSequence,
    detector: MotionDetector,
    ground_free: Vec<Option<PointCloud>>,
}

impl<'a> Pipeline<'a> {
    pub fn new(cfg: &'a PipelineConfig, seq: &'a FrameSequence) -> Result<Self> {
        cfg.validate()?;
        let mode = if cfg.runtime.exhaustive {
            SearchMode::Exhaustive
        } else {
            SearchMode::CoarseToFine
        };
        Ok(Self {
            cfg,
            seq,
            detector: MotionDetector::new(cfg.search.clone(), cfg.inhibition.clone(), mode)?,
            ground_free: vec![None; seq.len()],
        })
    }

    pub fn detector(&self) -> &MotionDetector {
        &self.detector
    }

    fn ground_free(&mut self, i: usize) -> &PointCloud {
        if self.ground_free[i].is_none() {
            self.ground_free[i] = Some(remove_ground(&self.seq.frames[i].cloud, &self.cfg.ground));
        }
        // Frames older than the longest look-back are no longer needed.
        let horizon = self.cfg.fusion.num_frames + self.cfg.runtime.lowpass_window;
        if i > horizon {
            for old in &mut self.ground_free[..i - horizon] {
                *old = None;
            }
        }
        self.ground_free[i].as_ref().expect("filled above")
    }

    /// Runs the detector for pairs `(t, t - k)`, `k = 1..=max_k`, as far as
    /// history allows.
    pub fn pair_fields(&mut self, t: usize, max_k: usize) -> Result<(PairFields, Duration, Duration)> {
        if t >= self.seq.len() {
            return Err(Error::Validation(format!("frame {t} is past the end of the sequence")));
        }
        let start = Instant::now();
        let cur_pose = self.seq.frames[t].pose;
        let cloud = self.ground_free(t).clone();
        let maps = voxelize_bev(&cloud, &self.cfg.bev);
        let max_k = max_k.min(t);
        let window = self.cfg.runtime.lowpass_window;
        let lookback = if max_k == 0 { 0 } else { (max_k + window - 1).min(t) };
        // history[j - 1] holds frame t - j in the current sensor frame.
        let mut history = Vec::with_capacity(lookback);
        for j in 1..=lookback {
            let i = t - j;
            let pose = self.seq.frames[i].pose;
            let past = self.ground_free(i).clone();
            let comp = compensate_ego_motion(&past, &pose, &cur_pose)?;
            history.push(voxelize_bev(&comp, &self.cfg.bev));
        }
        let preprocess = start.elapsed();

        let start = Instant::now();
        let mut fields = Vec::with_capacity(max_k);
        let mut stats = Vec::with_capacity(max_k);
        for k in 1..=max_k {
            let mut lp = LowPassState::new(self.cfg.search.tau)?;
            let oldest = (k + window - 1).min(t);
            for j in (k..=oldest).rev() {
                lp.step(&history[j - 1].occupancy)?;
            }
            let filtered = lp.step(&maps.occupancy)?.clone();
            let (f, s) = self.detector.detect(&maps, &history[k - 1], &filtered, k as u32)?;
            fields.push(f);
            stats.push(s);
        }
        let detect = start.elapsed();
        history.truncate(max_k);
        Ok((
            PairFields {
                frame_index: t,
                fields,
                stats,
                cloud,
                maps,
                previous: history,
            },
            preprocess,
            detect,
        ))
    }

    /// Fuses the first `k` pair fields and turns the result into detections.
    pub fn finish(&self, pairs: &PairFields, k: usize) -> Result<FrameResult> {
        let start = Instant::now();
        let (rows, cols) = pairs.maps.shape();
        let used = &pairs.fields[..k.min(pairs.fields.len())];
        let fused = if used.is_empty() {
            MotionField::empty(rows, cols, 1)
        } else {
            fuse_multiframe(used, &FusionConfig { num_frames: used.len(), ..self.cfg.fusion.clone() })?
        };
        let clusters = cluster_objects(&fused, &pairs.maps.occupancy, &self.cfg.cluster)?;
        let mut proposals = Vec::new();
        let mut empty_proposals = 0;
        for c in &clusters {
            match extract_proposal_points(c, &pairs.cloud, &self.cfg.bev, self.cfg.proposals.expansion, self.seq.cadence_hz) {
                Some(mut p) => {
                    p.frame_index = pairs.frame_index;
                    p.cluster_id = proposals.len();
                    proposals.push(p);
                }
                None => {
                    log::warn!("frame {}: cluster with no points dropped", pairs.frame_index);
                    empty_proposals += 1;
                }
            }
        }
        let fuse_cluster = start.elapsed();

        let start = Instant::now();
        let mut detections = Vec::with_capacity(proposals.len());
        for p in &proposals {
            let center = estimate_center(&p.points)?;
            let fit = fit_box(&p.points, &center, &self.cfg.fit)?;
            detections.push(Detection {
                frame_index: pairs.frame_index,
                category: classify_by_size(&fit.bbox),
                bbox: fit.bbox,
                speed: p.speed(),
            });
        }
        let mut stats = DetectionStats::default();
        for s in &pairs.stats[..used.len()] {
            stats += *s;
        }
        stats.moving_cells = fused.moving_count() as u64;
        Ok(FrameResult {
            frame_index: pairs.frame_index,
            detections,
            proposals,
            fused,
            stats,
            empty_proposals,
            times: StageTimes {
                fuse_cluster,
                fit: start.elapsed(),
                ..Default::default()
            },
        })
    }

    /// Full processing of frame `t` with the configured fusion depth.
    pub fn process_frame(&mut self, t: usize) -> Result<FrameResult> {
        let k = self.cfg.fusion.num_frames;
        let (pairs, preprocess, detect) = self.pair_fields(t, k)?;
        let mut r = self.finish(&pairs, k)?;
        r.times.preprocess = preprocess;
        r.times.detect = detect;
        Ok(r)
    }
}

/// Results for a frame range of one sequence.
#[derive(Debug, Clone)]
pub struct SequenceRun {
    pub frames: RangeInclusive<usize>,
    pub results: Vec<FrameResult>,
    /// Frames that failed, with their error text.
    pub failures: Vec<(usize, String)>,
}

impl SequenceRun {
    pub fn detections(&self) -> Vec<Detection> {
        self.results.iter().flat_map(|r| r.detections.iter().copied()).collect()
    }

    pub fn stats(&self) -> DetectionStats {
        let mut s = DetectionStats::default();
        for r in &self.results {
            s += r.stats;
        }
        s
    }

    pub fn times(&self) -> StageTimes {
        let mut t = StageTimes::default();
        for r in &self.results {
            t += r.times;
        }
        t
    }
}

/// Processes `frames` (default: all) in order. A frame that fails is logged
/// and recorded, and processing continues.
pub fn run_sequence(
    seq: &FrameSequence,
    cfg: &PipelineConfig,
    frames: Option<RangeInclusive<usize>>,
) -> Result<SequenceRun> {
    if seq.is_empty() {
        return Err(Error::Validation("sequence has no frames".into()));
    }
    let frames = frames.unwrap_or(0..=seq.len() - 1);
    if *frames.end() >= seq.len() || frames.start() > frames.end() {
        return Err(Error::Validation(format!(
            "frame range {}..{} is outside 0..{}",
            frames.start(),
            frames.end(),
            seq.len() - 1
        )));
    }
    let mut pipe = Pipeline::new(cfg, seq)?;
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for t in frames.clone() {
        match pipe.process_frame(t) {
            Ok(r) => results.push(r),
            Err(e) => {
                log::error!("frame {t}: {e}");
                failures.push((t, e.to_string()));
            }
        }
    }
    Ok(SequenceRun {
        frames,
        results,
        failures,
    })
}
