//! Bird's-eye-view voxelization into occupancy, mean-height and Gaussian
//! maps.
//!
//! Voxels are `cell_size x cell_size` columns with no vertical split: a
//! column is occupied as soon as one point falls in it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scene_io::PointCloud;

/// Grid geometry. Rows index `y`, columns index `x`:
/// `row = floor((y - y_min) / cell_size)`, `col = floor((x - x_min) / cell_size)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BevConfig {
    pub cell_size: f64,
    pub rows: usize,
    pub cols: usize,
    pub x_min: f64,
    pub y_min: f64,
    pub gaussian_size: usize,
    pub gaussian_sigma: f64,
}

impl Default for BevConfig {
    /// 200 x 350 cells of 0.2 m: 40 m across, from 10 m behind to 60 m ahead.
    fn default() -> Self {
        Self {
            cell_size: 0.2,
            rows: 200,
            cols: 350,
            x_min: -10.0,
            y_min: -20.0,
            gaussian_size: 5,
            gaussian_sigma: 1.0,
        }
    }
}

impl BevConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size > 0.0) || self.rows == 0 || self.cols == 0 {
            return Err(Error::Config(
                "bev cell_size, rows and cols must be positive".into(),
            ));
        }
        if self.gaussian_size % 2 == 0 {
            return Err(Error::Config(format!(
                "gaussian_size must be odd, got {}",
                self.gaussian_size
            )));
        }
        if !(self.gaussian_sigma > 0.0) {
            return Err(Error::Config("gaussian_sigma must be positive".into()));
        }
        Ok(())
    }

    pub fn x_max(&self) -> f64 {
        self.x_min + self.cols as f64 * self.cell_size
    }

    pub fn y_max(&self) -> f64 {
        self.y_min + self.rows as f64 * self.cell_size
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.cell_of(x, y).is_some()
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let c = ((x - self.x_min) / self.cell_size).floor();
        let r = ((y - self.y_min) / self.cell_size).floor();
        if c >= 0.0 && r >= 0.0 && (c as usize) < self.cols && (r as usize) < self.rows {
            Some((r as usize, c as usize))
        } else {
            None
        }
    }

    /// Unbounded cell index, for dilation tests near the border.
    pub fn cell_of_signed(&self, x: f64, y: f64) -> (i64, i64) {
        (
            ((y - self.y_min) / self.cell_size).floor() as i64,
            ((x - self.x_min) / self.cell_size).floor() as i64,
        )
    }

    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.x_min + (col as f64 + 0.5) * self.cell_size,
            self.y_min + (row as f64 + 0.5) * self.cell_size,
        )
    }

    /// Normalized 1D Gaussian taps; the 2D kernel is their outer product.
    pub fn gaussian_taps(&self) -> Vec<f64> {
        let r = (self.gaussian_size / 2) as i64;
        let two_s2 = 2.0 * self.gaussian_sigma * self.gaussian_sigma;
        let raw: Vec<f64> = (-r..=r).map(|k| (-(k * k) as f64 / two_s2).exp()).collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|v| v / sum).collect()
    }
}

/// The three co-registered receptor maps.
#[derive(Debug, Clone, PartialEq)]
pub struct BevMaps {
    /// 1.0 where at least one point fell in the cell, else 0.0.
    pub occupancy: Grid<f64>,
    /// Mean z of the cell's points; 0.0 where unoccupied.
    pub height: Grid<f64>,
    /// Gaussian blur of `occupancy`, in `[0, 1]`.
    pub gaussian: Grid<f64>,
    /// Points that fell outside the grid.
    pub dropped: usize,
}

impl BevMaps {
    pub fn empty(cfg: &BevConfig) -> Self {
        Self {
            occupancy: Grid::new(cfg.rows, cfg.cols),
            height: Grid::new(cfg.rows, cfg.cols),
            gaussian: Grid::new(cfg.rows, cfg.cols),
            dropped: 0,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.occupancy.shape()
    }

    #[inline]
    pub fn is_occupied(&self, row: usize, col: usize) -> bool {
        self.occupancy[(row, col)] > 0.0
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.as_slice().iter().filter(|&&v| v > 0.0).count()
    }
}

/// Zero-padded separable blur.
pub fn gaussian_blur(src: &Grid<f64>, taps: &[f64]) -> Grid<f64> {
    let (rows, cols) = src.shape();
    let r = (taps.len() / 2) as isize;
    let mut tmp = Grid::new(rows, cols);
    for row in 0..rows {
        for col in 0..cols {
            let mut acc = 0.0;
            for (k, w) in taps.iter().enumerate() {
                acc += w * src.at_or_zero(row as isize, col as isize + k as isize - r);
            }
            tmp[(row, col)] = acc;
        }
    }
    let mut out = Grid::new(rows, cols);
    for row in 0..rows {
        for col in 0..cols {
            let mut acc = 0.0;
            for (k, w) in taps.iter().enumerate() {
                acc += w * tmp.at_or_zero(row as isize + k as isize - r, col as isize);
            }
            out[(row, col)] = acc.clamp(0.0, 1.0);
        }
    }
    out
}

pub fn voxelize_bev(cloud: &PointCloud, cfg: &BevConfig) -> BevMaps {
    let mut binned: Vec<(usize, f64)> = Vec::with_capacity(cloud.len());
    let mut dropped = 0;
    for p in cloud.iter() {
        match cfg.cell_of(p.x, p.y) {
            Some((r, c)) => binned.push((r * cfg.cols + c, p.z)),
            None => dropped += 1,
        }
    }
    // Sorting makes the per-cell mean independent of point order.
    binned.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut maps = BevMaps::empty(cfg);
    maps.dropped = dropped;
    let occ = maps.occupancy.as_mut_slice();
    let hgt = maps.height.as_mut_slice();
    for run in binned.chunk_by(|a, b| a.0 == b.0) {
        let idx = run[0].0;
        let sum: f64 = run.iter().map(|&(_, z)| z).sum();
        occ[idx] = 1.0;
        hgt[idx] = sum / run.len() as f64;
    }
    maps.gaussian = gaussian_blur(&maps.occupancy, &cfg.gaussian_taps());
    maps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene_io::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small() -> BevConfig {
        BevConfig {
            rows: 40,
            cols: 50,
            x_min: 0.0,
            y_min: 0.0,
            ..BevConfig::default()
        }
    }

    #[test]
    fn default_taps_sum_to_one() {
        let t = BevConfig::default().gaussian_taps();
        assert_eq!(t.len(), 5);
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_even_kernel() {
        let cfg = BevConfig {
            gaussian_size: 4,
            ..BevConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn empty_cloud_gives_zero_maps() {
        let m = voxelize_bev(&PointCloud::default(), &small());
        assert!(m.occupancy.as_slice().iter().all(|&v| v == 0.0));
        assert!(m.height.as_slice().iter().all(|&v| v == 0.0));
        assert!(m.gaussian.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_point() {
        let cfg = small();
        let (x, y) = cfg.cell_center(7, 9);
        let m = voxelize_bev(&PointCloud::new(vec![Point::new(x, y, 1.4, 0.0)]), &cfg);
        for (r, c, &v) in m.occupancy.indexed_iter() {
            let hit = (r, c) == (7, 9);
            assert_eq!(v, if hit { 1.0 } else { 0.0 });
            assert_eq!(m.height[(r, c)], if hit { 1.4 } else { 0.0 });
        }
    }

    #[test]
    fn mean_height_and_drop_count() {
        let cfg = small();
        let (x, y) = cfg.cell_center(3, 3);
        let cloud = PointCloud::new(vec![
            Point::new(x, y, 1.0, 0.0),
            Point::new(x + 0.05, y - 0.05, 2.0, 0.0),
            Point::new(-5.0, 0.0, 0.0, 0.0),
        ]);
        let m = voxelize_bev(&cloud, &cfg);
        assert_eq!(m.height[(3, 3)], 1.5);
        assert_eq!(m.dropped, 1);
    }

    #[test]
    fn shift_by_one_cell_shifts_maps() {
        let cfg = small();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Points near cell centers so a whole-cell shift never crosses a boundary.
        let pts: Vec<Point> = (0..300)
            .map(|_| {
                let (x, y) = cfg.cell_center(rng.random_range(8..32), rng.random_range(8..40));
                Point::new(
                    x + rng.random_range(-0.08..0.08),
                    y + rng.random_range(-0.08..0.08),
                    rng.random_range(0.0..2.0),
                    0.0,
                )
            })
            .collect();
        let a = voxelize_bev(&PointCloud::new(pts.clone()), &cfg);
        let shifted: PointCloud = pts
            .iter()
            .map(|p| Point::new(p.x + cfg.cell_size, p.y - cfg.cell_size, p.z, 0.0))
            .collect();
        let b = voxelize_bev(&shifted, &cfg);
        for r in 3..cfg.rows - 3 {
            for c in 3..cfg.cols - 3 {
                assert_eq!(b.occupancy[(r - 1, c + 1)], a.occupancy[(r, c)]);
                assert!((b.height[(r - 1, c + 1)] - a.height[(r, c)]).abs() < 1e-12);
                assert!((b.gaussian[(r - 1, c + 1)] - a.gaussian[(r, c)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn point_order_does_not_matter() {
        let cfg = small();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut pts: Vec<Point> = (0..500)
            .map(|_| {
                Point::new(
                    rng.random_range(0.0..2.0),
                    rng.random_range(0.0..2.0),
                    rng.random_range(-1.0..3.0),
                    0.0,
                )
            })
            .collect();
        let a = voxelize_bev(&PointCloud::new(pts.clone()), &cfg);
        pts.reverse();
        let b = voxelize_bev(&PointCloud::new(pts), &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_range_and_support() {
        let cfg = small();
        let (x, y) = cfg.cell_center(20, 20);
        let m = voxelize_bev(&PointCloud::new(vec![Point::new(x, y, 0.0, 0.0)]), &cfg);
        for (r, c, &g) in m.gaussian.indexed_iter() {
            assert!((0.0..=1.0).contains(&g));
            let far = (r as i64 - 20).abs() > 2 || (c as i64 - 20).abs() > 2;
            if far {
                assert_eq!(g, 0.0);
            }
        }
    }
}
