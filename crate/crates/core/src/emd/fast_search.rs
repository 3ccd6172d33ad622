//! Axis-aligned EMD scoring that yields a rough direction per cell.
//!
//! For an offset `s` along one axis, the correlator output at cell `c` is
//! `S[s] = F(c) I(c+s) - I(c) F(c+s)` where `F` is the low-pass map. `S[s]`
//! is positive when content left `c` toward `c+s` (trailing-edge evidence);
//! `-S[-s]` is positive when content arrived at `c` from `c-s`
//! (leading-edge evidence). The directional score for motion `+s` is the
//! larger of the two, so both faces of a mover respond.

use rayon::prelude::*;

use crate::emd::{Connections, SearchConfig};
use crate::grid::Grid;

/// Fast-search output, one entry per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughField {
    /// `(x_sm, y_sm)` in cells; zero on unoccupied cells.
    pub vectors: Grid<(i32, i32)>,
    /// Best directional score over both axes.
    pub score: Grid<f64>,
    pub moving: Grid<bool>,
    /// Number of correlator evaluations.
    pub evaluations: u64,
}

impl RoughField {
    pub fn rough_count(&self) -> usize {
        self.moving.as_slice().iter().filter(|&&m| m).count()
    }
}

/// Best signed offset along one axis. Ties go to the smaller `|s|`; a tie
/// between `+s` and `-s` yields 0.
fn best_along(
    occ: &Grid<f64>,
    filt: &Grid<f64>,
    row: usize,
    col: usize,
    radius: i32,
    step: (isize, isize),
) -> (i32, f64) {
    let (r, c) = (row as isize, col as isize);
    let fc = filt[(row, col)];
    let ic = occ[(row, col)];
    let s_at = |s: i32| {
        let (rr, cc) = (r + step.0 * s as isize, c + step.1 * s as isize);
        fc * occ.at_or_zero(rr, cc) - ic * filt.at_or_zero(rr, cc)
    };
    let mut best = (0, 0.0);
    for s in 1..=radius {
        let plus = s_at(s).max(-s_at(-s));
        let minus = s_at(-s).max(-s_at(s));
        let (cand, score) = if plus > minus {
            (s, plus)
        } else if minus > plus {
            (-s, minus)
        } else {
            (0, plus)
        };
        if score > best.1 {
            best = (cand, score);
        }
    }
    best
}

/// Runs the fast search on a binarized occupancy map `occ` and its low-pass
/// map `filt`. Only occupied cells are scored.
pub fn fast_search(occ: &Grid<f64>, filt: &Grid<f64>, cfg: &SearchConfig) -> RoughField {
    assert!(occ.same_shape(filt), "fast_search maps must be co-registered");
    let (rows, cols) = occ.shape();
    let radius = cfg.max_distance as i32;
    let conn: Connections = cfg.connections;
    let per_row: Vec<Vec<((i32, i32), f64, bool)>> = (0..rows)
        .into_par_iter()
        .map(|row| {
            (0..cols)
                .map(|col| {
                    if occ[(row, col)] <= 0.0 {
                        return ((0, 0), 0.0, false);
                    }
                    let (x_sm, sh) = if conn.horizontal() {
                        best_along(occ, filt, row, col, radius, (0, 1))
                    } else {
                        (0, 0.0)
                    };
                    let (y_sm, sv) = if conn.vertical() {
                        best_along(occ, filt, row, col, radius, (1, 0))
                    } else {
                        (0, 0.0)
                    };
                    let score = sh.max(sv);
                    ((x_sm, y_sm), score, score > cfg.fast_score_threshold)
                })
                .collect()
        })
        .collect();

    let mut vectors = Grid::filled(rows, cols, (0, 0));
    let mut score = Grid::new(rows, cols);
    let mut moving = Grid::filled(rows, cols, false);
    let mut scored = 0u64;
    for (row, cells) in per_row.into_iter().enumerate() {
        for (col, (v, s, m)) in cells.into_iter().enumerate() {
            vectors[(row, col)] = v;
            score[(row, col)] = s;
            moving[(row, col)] = m;
            if occ[(row, col)] > 0.0 {
                scored += 1;
            }
        }
    }
    let axes = conn.horizontal() as u64 + conn.vertical() as u64;
    RoughField {
        vectors,
        score,
        moving,
        evaluations: scored * axes * 2 * radius as u64,
    }
}
