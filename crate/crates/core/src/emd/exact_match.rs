//! Dense patch matching over a sector of candidate displacements.
//!
//! A candidate `v = (x, y)` says the content at cell `a` of the current frame
//! sat at `a - v` in the previous frame. Three energies compare the patches:
//! Gaussian correlation (higher is better), occupancy difference and height
//! difference (lower is better). Each is divided by the number of in-grid
//! patch cells, min-max normalized over the candidates, and combined.

use crate::emd::{SearchConfig, SectorSpace};
use crate::error::{Error, Result};
use crate::preprocess::BevMaps;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchOutcome {
    /// Chosen displacement `(x, y)` in cells.
    pub offset: (i32, i32),
    /// Combined energy of the chosen displacement.
    pub energy: f64,
    /// All three energies were constant over the candidates; `offset` is
    /// then `(0, 0)`.
    pub degenerate: bool,
    /// Candidates evaluated.
    pub evaluations: u64,
    /// Mismatched occupancy cells in the patch at zero displacement minus
    /// those at `offset`.
    pub occupancy_gain: f64,
}

/// Raw energies `[E1, E2, E3]` of displacement `offset` for the patch of
/// side `patch` centered at `cell`. Previous-frame reads outside the grid
/// are zero.
pub fn patch_energies(
    cur: &BevMaps,
    prev: &BevMaps,
    cell: (usize, usize),
    offset: (i32, i32),
    patch: usize,
) -> [f64; 3] {
    let (rows, cols) = cur.shape();
    let half = (patch / 2) as isize;
    let (r0, r1) = (
        (cell.0 as isize - half).max(0),
        (cell.0 as isize + half).min(rows as isize - 1),
    );
    let (c0, c1) = (
        (cell.1 as isize - half).max(0),
        (cell.1 as isize + half).min(cols as isize - 1),
    );
    let (dx, dy) = (offset.0 as isize, offset.1 as isize);
    let (mut e1, mut e2, mut e3) = (0.0, 0.0, 0.0);
    for r in r0..=r1 {
        let ru = r as usize;
        let (occ_t, h_t, g_t) = (cur.occupancy.row(ru), cur.height.row(ru), cur.gaussian.row(ru));
        let pr = r - dy;
        if pr < 0 || pr >= rows as isize {
            // Previous row is off-grid: every previous value reads as zero.
            for cu in c0 as usize..=c1 as usize {
                e2 += occ_t[cu].abs();
                if occ_t[cu] > 0.0 {
                    e3 += h_t[cu].abs();
                }
            }
            continue;
        }
        let pu = pr as usize;
        let (occ_p, h_p, g_p) = (prev.occupancy.row(pu), prev.height.row(pu), prev.gaussian.row(pu));
        let (pc0, pc1) = (c0 - dx, c1 - dx);
        if pc0 >= 0 && pc1 < cols as isize {
            let cur_span = c0 as usize..=c1 as usize;
            let prev_span = pc0 as usize..=pc1 as usize;
            for ((((&ot, &ht), &gt), &op), (&hp, &gp)) in occ_t[cur_span.clone()]
                .iter()
                .zip(&h_t[cur_span.clone()])
                .zip(&g_t[cur_span])
                .zip(&occ_p[prev_span.clone()])
                .zip(h_p[prev_span.clone()].iter().zip(&g_p[prev_span]))
            {
                e1 += (gt * gp).abs();
                e2 += (ot - op).abs();
                if ot > 0.0 || op > 0.0 {
                    e3 += (ht - hp).abs();
                }
            }
            continue;
        }
        for c in c0..=c1 {
            let cu = c as usize;
            let pc = c - dx;
            let (o_p, hh_p, gg_p) = if pc >= 0 && pc < cols as isize {
                let pcu = pc as usize;
                (occ_p[pcu], h_p[pcu], g_p[pcu])
            } else {
                (0.0, 0.0, 0.0)
            };
            e1 += (g_t[cu] * gg_p).abs();
            e2 += (occ_t[cu] - o_p).abs();
            if occ_t[cu] > 0.0 || o_p > 0.0 {
                e3 += (h_t[cu] - hh_p).abs();
            }
        }
    }
    let n = patch_cells(cur.shape(), cell, patch) as f64;
    [e1 / n, e2 / n, e3 / n]
}

/// In-grid cells of the patch of side `patch` centered at `cell`.
pub fn patch_cells(shape: (usize, usize), cell: (usize, usize), patch: usize) -> usize {
    let half = patch / 2;
    let span = |i: usize, len: usize| (i + half).min(len - 1) - i.saturating_sub(half) + 1;
    span(cell.0, shape.0) * span(cell.1, shape.1)
}

/// Combines raw energies per candidate into `w1 (1 - E1') + w2 E2' + w3 E3'`.
/// Returns `None` when all three energies are constant.
pub fn combine_energies(raw: &[[f64; 3]], weights: [f64; 3]) -> Option<Vec<f64>> {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for e in raw {
        for k in 0..3 {
            lo[k] = lo[k].min(e[k]);
            hi[k] = hi[k].max(e[k]);
        }
    }
    if (0..3).all(|k| hi[k] == lo[k]) {
        return None;
    }
    let norm = |k: usize, v: f64| {
        if hi[k] > lo[k] {
            (v - lo[k]) / (hi[k] - lo[k])
        } else {
            0.0
        }
    };
    Some(
        raw.iter()
            .map(|e| {
                weights[0] * (1.0 - norm(0, e[0])) + weights[1] * norm(1, e[1]) + weights[2] * norm(2, e[2])
            })
            .collect(),
    )
}

/// Index of the minimum; ties go to the smaller squared norm, then to the
/// earlier (row-major) offset.
pub fn argmin_offset(offsets: &[(i32, i32)], energy: &[f64]) -> usize {
    let norm2 = |(x, y): (i32, i32)| x * x + y * y;
    let mut best = 0;
    for i in 1..offsets.len() {
        let better = energy[i] < energy[best]
            || (energy[i] == energy[best] && norm2(offsets[i]) < norm2(offsets[best]));
        if better {
            best = i;
        }
    }
    best
}

pub fn exact_match(
    cur: &BevMaps,
    prev: &BevMaps,
    cell: (usize, usize),
    sector: &SectorSpace,
    cfg: &SearchConfig,
) -> Result<MatchOutcome> {
    if sector.is_empty() {
        return Err(Error::Internal("exact_match called with an empty sector".into()));
    }
    let raw: Vec<[f64; 3]> = sector
        .offsets
        .iter()
        .map(|&o| patch_energies(cur, prev, cell, o, cfg.patch_size))
        .collect();
    let evaluations = raw.len() as u64;
    let zero_e2 = match sector.offsets.iter().position(|&o| o == (0, 0)) {
        Some(i) => raw[i][1],
        None => patch_energies(cur, prev, cell, (0, 0), cfg.patch_size)[1],
    };
    let n = patch_cells(cur.shape(), cell, cfg.patch_size) as f64;
    Ok(match combine_energies(&raw, cfg.weights) {
        None => MatchOutcome {
            offset: (0, 0),
            energy: 0.0,
            degenerate: true,
            evaluations,
            occupancy_gain: 0.0,
        },
        Some(total) => {
            let i = argmin_offset(&sector.offsets, &total);
            MatchOutcome {
                offset: sector.offsets[i],
                energy: total[i],
                degenerate: false,
                evaluations,
                occupancy_gain: (zero_e2 - raw[i][1]) * n,
            }
        }
    })
}
