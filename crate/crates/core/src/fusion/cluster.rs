//! Grouping moving cells into objects by adjacency and motion similarity.

use serde::{Deserialize, Serialize};

use crate::emd::MotionField;
use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    /// Largest angle between neighboring vectors, degrees.
    pub max_angle_deg: f64,
    /// Largest magnitude difference relative to the larger magnitude.
    pub max_magnitude_ratio: f64,
    /// Smaller clusters are discarded.
    pub min_cells: usize,
    /// Merge clusters with similar mean vectors that lie on one connected
    /// structure of occupied cells.
    pub merge_through_occupancy: bool,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            max_angle_deg: 45.0,
            max_magnitude_ratio: 0.5,
            min_cells: 2,
            merge_through_occupancy: true,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=180.0).contains(&self.max_angle_deg) || !(self.max_magnitude_ratio >= 0.0) {
            return Err(Error::Config(
                "cluster angle must be in [0, 180] and magnitude ratio nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Whether two neighboring moving cells may join.
    pub fn similar(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        let (na, nb) = (a[0].hypot(a[1]), b[0].hypot(b[1]));
        let big = na.max(nb);
        if big == 0.0 {
            return true;
        }
        if (na - nb).abs() > self.max_magnitude_ratio * big + 1e-12 {
            return false;
        }
        if na == 0.0 || nb == 0.0 {
            return false;
        }
        let cos = (a[0] * b[0] + a[1] * b[1]) / (na * nb);
        cos >= self.max_angle_deg.to_radians().cos() - 1e-12
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Member cells `(row, col)`, sorted.
    pub cells: Vec<(usize, usize)>,
    /// Mean vector in cells per frame.
    pub mean_vector: [f64; 2],
    pub min_row: usize,
    pub max_row: usize,
    pub min_col: usize,
    pub max_col: usize,
}

impl Cluster {
    pub fn from_cells(mut cells: Vec<(usize, usize)>, mean_vector: [f64; 2]) -> Self {
        cells.sort_unstable();
        Self {
            min_row: cells.iter().map(|c| c.0).min().unwrap_or(0),
            max_row: cells.iter().map(|c| c.0).max().unwrap_or(0),
            min_col: cells.iter().map(|c| c.1).min().unwrap_or(0),
            max_col: cells.iter().map(|c| c.1).max().unwrap_or(0),
            cells,
            mean_vector,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Raw components before any size filter: cells and vector sum.
fn components(field: &MotionField, cfg: &ClusterConfig) -> Vec<(Vec<(usize, usize)>, [f64; 2])> {
    let (rows, cols) = field.shape();
    let mut label = vec![usize::MAX; rows * cols];
    let mut out = Vec::new();
    for start in 0..rows * cols {
        let (sr, sc) = (start / cols, start % cols);
        if label[start] != usize::MAX || !field.moving[(sr, sc)] {
            continue;
        }
        let Some(_) = field.vectors[(sr, sc)] else { continue };
        let id = out.len();
        label[start] = id;
        let mut stack = vec![(sr, sc)];
        let mut cells = Vec::new();
        let mut sum = [0.0, 0.0];
        while let Some((r, c)) = stack.pop() {
            let v = field.vectors[(r, c)].expect("moving cells carry vectors");
            cells.push((r, c));
            sum[0] += v[0];
            sum[1] += v[1];
            for (nr, nc) in neighbors(r, c, rows, cols) {
                let ni = nr * cols + nc;
                if label[ni] != usize::MAX || !field.moving[(nr, nc)] {
                    continue;
                }
                if let Some(w) = field.vectors[(nr, nc)] {
                    if cfg.similar(v, w) {
                        label[ni] = id;
                        stack.push((nr, nc));
                    }
                }
            }
        }
        out.push((cells, sum));
    }
    out
}

fn neighbors(r: usize, c: usize, rows: usize, cols: usize) -> impl Iterator<Item = (usize, usize)> {
    (-1isize..=1).flat_map(move |dr| {
        (-1isize..=1).filter_map(move |dc| {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            ((dr, dc) != (0, 0) && nr >= 0 && nc >= 0 && nr < rows as isize && nc < cols as isize)
                .then_some((nr as usize, nc as usize))
        })
    })
}

/// 8-connected components of the occupied cells, `usize::MAX` elsewhere.
fn occupancy_labels(occupancy: &Grid<f64>) -> Vec<usize> {
    let (rows, cols) = occupancy.shape();
    let mut label = vec![usize::MAX; rows * cols];
    let mut next = 0;
    for start in 0..rows * cols {
        if label[start] != usize::MAX || !(occupancy[(start / cols, start % cols)] > 0.0) {
            continue;
        }
        label[start] = next;
        let mut stack = vec![(start / cols, start % cols)];
        while let Some((r, c)) = stack.pop() {
            for (nr, nc) in neighbors(r, c, rows, cols) {
                let ni = nr * cols + nc;
                if label[ni] == usize::MAX && occupancy[(nr, nc)] > 0.0 {
                    label[ni] = next;
                    stack.push((nr, nc));
                }
            }
        }
        next += 1;
    }
    label
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn finish(
    groups: Vec<(Vec<(usize, usize)>, [f64; 2])>,
    interval: f64,
    cfg: &ClusterConfig,
) -> Vec<Cluster> {
    let mut kept: Vec<Cluster> = groups
        .into_iter()
        .filter(|(cells, _)| cells.len() >= cfg.min_cells)
        .map(|(cells, sum)| {
            let n = cells.len() as f64;
            Cluster::from_cells(cells, [sum[0] / n / interval, sum[1] / n / interval])
        })
        .collect();
    kept.sort_by_key(|c| (c.min_row, c.min_col, c.cells[0]));
    kept
}

/// 8-connected components of moving cells joined only across similar
/// vectors. Sorted by smallest row, then smallest column.
pub fn cluster_moving_cells(field: &MotionField, cfg: &ClusterConfig) -> Vec<Cluster> {
    finish(components(field, cfg), field.interval.max(1) as f64, cfg)
}

/// Like [`cluster_moving_cells`], then (if enabled) merges components whose
/// mean vectors are similar and which touch the same connected region of
/// `occupancy`. Faces sliding along themselves show no motion, which
/// otherwise splits one object into several clusters.
pub fn cluster_objects(field: &MotionField, occupancy: &Grid<f64>, cfg: &ClusterConfig) -> Result<Vec<Cluster>> {
    if occupancy.shape() != field.shape() {
        return Err(Error::Validation(format!(
            "occupancy {:?} and field {:?} differ in shape",
            occupancy.shape(),
            field.shape()
        )));
    }
    let interval = field.interval.max(1) as f64;
    let comps = components(field, cfg);
    if !cfg.merge_through_occupancy {
        return Ok(finish(comps, interval, cfg));
    }
    let cols = field.shape().1;
    let occ = occupancy_labels(occupancy);
    let mean = |(cells, sum): &(Vec<(usize, usize)>, [f64; 2])| {
        let n = cells.len() as f64;
        [sum[0] / n, sum[1] / n]
    };
    let mut by_region: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, (cells, _)) in comps.iter().enumerate() {
        let mut regions: Vec<usize> = cells
            .iter()
            .map(|&(r, c)| occ[r * cols + c])
            .filter(|&l| l != usize::MAX)
            .collect();
        regions.sort_unstable();
        regions.dedup();
        for l in regions {
            by_region.entry(l).or_default().push(i);
        }
    }
    let mut parent: Vec<usize> = (0..comps.len()).collect();
    for members in by_region.values() {
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                if cfg.similar(mean(&comps[a]), mean(&comps[b])) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
    }
    let mut merged: Vec<(Vec<(usize, usize)>, [f64; 2])> = vec![(Vec::new(), [0.0; 2]); comps.len()];
    for (i, (cells, sum)) in comps.into_iter().enumerate() {
        let root = find(&mut parent, i);
        merged[root].0.extend(cells);
        merged[root].1[0] += sum[0];
        merged[root].1[1] += sum[1];
    }
    Ok(finish(merged.into_iter().filter(|(c, _)| !c.is_empty()).collect(), interval, cfg))
}
