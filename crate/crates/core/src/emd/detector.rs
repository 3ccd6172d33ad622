//! The full per-frame-pair detector: fast search, sector matching and
//! lateral inhibition.

use rayon::prelude::*;

use crate::emd::{
    build_sector, exact_match, fast_search, full_disc, lateral_inhibition, InhibitionKernel,
    LowPassState, SearchConfig, SectorSpace,
};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::preprocess::BevMaps;

/// Per-cell motion estimate for one frame pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionField {
    /// Displacement in cells over `interval` frames; `Some` only on moving
    /// cells.
    pub vectors: Grid<Option<[f64; 2]>>,
    /// Inhibited magnitude, in cells per `interval`, on cells that reached
    /// the inhibition stage; 0 elsewhere.
    pub score: Grid<f64>,
    pub moving: Grid<bool>,
    /// Fast-search direction `(x_sm, y_sm)`.
    pub rough_vectors: Grid<(i32, i32)>,
    /// Cells sent to the exact-match stage.
    pub rough: Grid<bool>,
    /// Exact-match displacement before inhibition, on non-degenerate rough
    /// cells.
    pub matched: Grid<Option<(i32, i32)>>,
    /// Frames between the two maps the vectors were measured over.
    pub interval: u32,
}

impl MotionField {
    pub fn empty(rows: usize, cols: usize, interval: u32) -> Self {
        Self {
            vectors: Grid::filled(rows, cols, None),
            score: Grid::new(rows, cols),
            moving: Grid::filled(rows, cols, false),
            rough_vectors: Grid::filled(rows, cols, (0, 0)),
            rough: Grid::filled(rows, cols, false),
            matched: Grid::filled(rows, cols, None),
            interval,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.moving.shape()
    }

    pub fn moving_count(&self) -> usize {
        self.moving.as_slice().iter().filter(|&&m| m).count()
    }

    pub fn moving_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.moving.indexed_iter().filter(|(_, _, &m)| m).map(|(r, c, _)| (r, c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Fast search, then sector-restricted matching at rough-moving cells.
    #[default]
    CoarseToFine,
    /// Full-disc matching at every occupied cell.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DetectionStats {
    pub occupied_cells: u64,
    pub rough_cells: u64,
    pub degenerate_cells: u64,
    /// Cells with a nonzero match before inhibition.
    pub candidate_cells: u64,
    pub moving_cells: u64,
    pub fast_evaluations: u64,
    /// Candidate displacements scored by the exact-match stage.
    pub energy_evaluations: u64,
}

impl std::ops::AddAssign for DetectionStats {
    fn add_assign(&mut self, o: Self) {
        self.occupied_cells += o.occupied_cells;
        self.rough_cells += o.rough_cells;
        self.degenerate_cells += o.degenerate_cells;
        self.candidate_cells += o.candidate_cells;
        self.moving_cells += o.moving_cells;
        self.fast_evaluations += o.fast_evaluations;
        self.energy_evaluations += o.energy_evaluations;
    }
}

/// Detector with its sectors precomputed. The fast-search direction is
/// reduced to its signs, so nine sectors cover every case. A zero component
/// next to a nonzero one only says the fast search saw nothing along that
/// axis, so such a direction searches both diagonal sectors on its side.
#[derive(Debug, Clone)]
pub struct MotionDetector {
    cfg: SearchConfig,
    kernel: InhibitionKernel,
    mode: SearchMode,
    sectors: Vec<SectorSpace>,
}

fn sector_slot(b: (i32, i32)) -> usize {
    ((b.1.signum() + 1) * 3 + (b.0.signum() + 1)) as usize
}

fn search_space(signs: (i32, i32), radius: usize) -> Result<SectorSpace> {
    let halves = match signs {
        (0, 0) => return build_sector(signs, radius),
        (x, 0) => [(x, 1), (x, -1)],
        (0, y) => [(1, y), (-1, y)],
        _ => return build_sector(signs, radius),
    };
    let mut offsets = build_sector(halves[0], radius)?.offsets;
    offsets.extend(build_sector(halves[1], radius)?.offsets);
    offsets.sort_by_key(|&(x, y)| (y, x));
    offsets.dedup();
    Ok(SectorSpace {
        bisector: signs,
        radius,
        offsets,
    })
}

impl MotionDetector {
    pub fn new(cfg: SearchConfig, kernel: InhibitionKernel, mode: SearchMode) -> Result<Self> {
        cfg.validate()?;
        kernel.validate()?;
        let mut sectors = Vec::with_capacity(9);
        for y in -1..=1 {
            for x in -1..=1 {
                sectors.push(search_space((x, y), cfg.max_distance)?);
            }
        }
        Ok(Self {
            cfg,
            kernel,
            mode,
            sectors,
        })
    }

    pub fn config(&self) -> &SearchConfig {
        &self.cfg
    }

    pub fn kernel(&self) -> &InhibitionKernel {
        &self.kernel
    }

    pub fn mode(&self) -> SearchMode {
        self.mode
    }

    pub fn sector_for(&self, rough: (i32, i32)) -> &SectorSpace {
        &self.sectors[sector_slot(rough)]
    }

    /// Detects motion of `cur` relative to `prev` (already compensated into
    /// the current frame). `filtered` is the low-pass occupancy including
    /// `cur`, ending `interval` frames after `prev`.
    pub fn detect(
        &self,
        cur: &BevMaps,
        prev: &BevMaps,
        filtered: &Grid<f64>,
        interval: u32,
    ) -> Result<(MotionField, DetectionStats)> {
        let shape = cur.shape();
        if prev.shape() != shape || filtered.shape() != shape {
            return Err(Error::Validation(format!(
                "maps are not co-registered: {:?}, {:?}, {:?}",
                shape,
                prev.shape(),
                filtered.shape()
            )));
        }
        let (rows, cols) = shape;
        let mut field = MotionField::empty(rows, cols, interval);
        let mut stats = DetectionStats {
            occupied_cells: cur.occupied_count() as u64,
            ..Default::default()
        };

        let disc;
        let cells: Vec<(usize, usize)> = match self.mode {
            SearchMode::CoarseToFine => {
                let rough = fast_search(&cur.occupancy, filtered, &self.cfg);
                stats.fast_evaluations = rough.evaluations;
                field.rough_vectors = rough.vectors;
                field.rough = rough.moving;
                disc = None;
                field.rough.indexed_iter().filter(|(_, _, &m)| m).map(|(r, c, _)| (r, c)).collect()
            }
            SearchMode::Exhaustive => {
                disc = Some(full_disc(self.cfg.max_distance)?);
                field.rough = cur.occupancy.map(|&o| o > 0.0);
                field.rough.indexed_iter().filter(|(_, _, &m)| m).map(|(r, c, _)| (r, c)).collect()
            }
        };
        stats.rough_cells = cells.len() as u64;

        let outcomes: Vec<_> = cells
            .par_iter()
            .map(|&cell| {
                let sector = match &disc {
                    Some(d) => d,
                    None => self.sector_for(field.rough_vectors[cell]),
                };
                exact_match(cur, prev, cell, sector, &self.cfg)
            })
            .collect::<Result<_>>()?;

        for (&cell, out) in cells.iter().zip(&outcomes) {
            stats.energy_evaluations += out.evaluations;
            if out.degenerate {
                stats.degenerate_cells += 1;
                continue;
            }
            field.matched[cell] = Some(out.offset);
            if out.offset != (0, 0) && out.occupancy_gain >= self.cfg.min_occupancy_gain {
                stats.candidate_cells += 1;
                field.moving[cell] = true;
                field.vectors[cell] = Some([out.offset.0 as f64, out.offset.1 as f64]);
            }
        }

        let field = lateral_inhibition(&field, &self.kernel, self.cfg.moving_magnitude_threshold)?;
        stats.moving_cells = field.moving_count() as u64;
        Ok((field, stats))
    }
}

/// One detection step for adjacent frames: advances `state` with the
/// current occupancy, then runs the coarse-to-fine detector.
pub fn detect_motion(
    cur: &BevMaps,
    prev: &BevMaps,
    state: &mut LowPassState,
    cfg: &SearchConfig,
    kernel: &InhibitionKernel,
) -> Result<(MotionField, DetectionStats)> {
    let detector = MotionDetector::new(cfg.clone(), kernel.clone(), SearchMode::CoarseToFine)?;
    let filtered = state.step(&cur.occupancy)?.clone();
    detector.detect(cur, prev, &filtered, 1)
}
