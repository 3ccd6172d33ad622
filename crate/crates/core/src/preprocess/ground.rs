//! Grid-based ground removal.
//!
//! Points are binned into coarse square cells and each cell's lowest z
//! seeds a ground estimate. The estimate is then relaxed so that no cell
//! sits higher than a neighbor by more than the configured slope allows,
//! which pulls down cells that contain only object points. A point is ground
//! when it lies within `height_threshold` of its cell's estimate.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::scene_io::PointCloud;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundConfig {
    pub cell_size: f64,
    pub height_threshold: f64,
    pub max_slope_deg: f64,
}

impl Default for GroundConfig {
    fn default() -> Self {
        Self {
            cell_size: 1.0,
            height_threshold: 0.25,
            max_slope_deg: 15.0,
        }
    }
}

impl GroundConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.cell_size > 0.0 && self.height_threshold >= 0.0) {
            return Err(crate::Error::Config(
                "ground cell_size must be positive and height_threshold nonnegative".into(),
            ));
        }
        if !(0.0..90.0).contains(&self.max_slope_deg) {
            return Err(crate::Error::Config("ground max_slope_deg must be in [0, 90)".into()));
        }
        Ok(())
    }
}

type Key = (i64, i64);

fn key(cfg: &GroundConfig, x: f64, y: f64) -> Key {
    (
        (x / cfg.cell_size).floor() as i64,
        (y / cfg.cell_size).floor() as i64,
    )
}

/// Per-point ground mask (true = ground).
pub fn ground_mask(cloud: &PointCloud, cfg: &GroundConfig) -> Vec<bool> {
    if cloud.is_empty() {
        return Vec::new();
    }
    let mut lowest: HashMap<Key, f64> = HashMap::new();
    for p in cloud.iter() {
        let e = lowest.entry(key(cfg, p.x, p.y)).or_insert(f64::INFINITY);
        *e = e.min(p.z);
    }
    let rise = cfg.max_slope_deg.to_radians().tan() * cfg.cell_size;
    let mut keys: Vec<Key> = lowest.keys().copied().collect();
    keys.sort_unstable();
    // Relax until no cell exceeds a neighbor's estimate plus the allowed rise.
    loop {
        let mut changed = false;
        for pass in [false, true] {
            let iter: Box<dyn Iterator<Item = &Key>> = if pass {
                Box::new(keys.iter().rev())
            } else {
                Box::new(keys.iter())
            };
            for &(i, j) in iter {
                let mut bound = f64::INFINITY;
                for di in -1..=1 {
                    for dj in -1..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        if let Some(&z) = lowest.get(&(i + di, j + dj)) {
                            let step = if di != 0 && dj != 0 {
                                rise * std::f64::consts::SQRT_2
                            } else {
                                rise
                            };
                            bound = bound.min(z + step);
                        }
                    }
                }
                let cur = lowest[&(i, j)];
                if bound < cur {
                    lowest.insert((i, j), bound);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    cloud
        .iter()
        .map(|p| p.z - lowest[&key(cfg, p.x, p.y)] <= cfg.height_threshold)
        .collect()
}

/// Returns the non-ground subset, preserving input order.
pub fn remove_ground(cloud: &PointCloud, cfg: &GroundConfig) -> PointCloud {
    let mask = ground_mask(cloud, cfg);
    cloud
        .iter()
        .zip(mask)
        .filter(|(_, g)| !g)
        .map(|(p, _)| *p)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene_io::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_in_empty_out() {
        assert!(remove_ground(&PointCloud::default(), &GroundConfig::default()).is_empty());
    }

    #[test]
    fn flat_plane_with_raised_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pts = Vec::new();
        let mut is_box = Vec::new();
        for _ in 0..20000 {
            pts.push(Point::new(
                rng.random_range(-15.0..15.0),
                rng.random_range(-15.0..15.0),
                0.0,
                0.0,
            ));
            is_box.push(false);
        }
        for _ in 0..800 {
            pts.push(Point::new(
                rng.random_range(2.0..6.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.3..1.8),
                0.0,
            ));
            is_box.push(true);
        }
        let cloud = PointCloud::new(pts.clone());
        let kept = remove_ground(&cloud, &GroundConfig::default());
        let expected: Vec<Point> = pts
            .iter()
            .zip(&is_box)
            .filter(|(_, b)| **b)
            .map(|(p, _)| *p)
            .collect();
        assert_eq!(kept.points, expected);
    }

    #[test]
    fn sloped_plane_with_mover() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let grade = 5f64.to_radians().tan();
        let mut pts = Vec::new();
        let mut is_mover = Vec::new();
        for _ in 0..6000 {
            let x = rng.random_range(-20.0..30.0);
            let y = rng.random_range(-15.0..15.0);
            pts.push(Point::new(x, y, grade * x, 0.0));
            is_mover.push(false);
        }
        // Car body with 0.3 m ground clearance.
        for _ in 0..1500 {
            let x = rng.random_range(8.0..12.0);
            let y = rng.random_range(-1.0..1.0);
            let z = grade * x + rng.random_range(0.3..1.5);
            pts.push(Point::new(x, y, z, 0.0));
            is_mover.push(true);
        }
        let mask = ground_mask(&PointCloud::new(pts), &GroundConfig::default());
        let plane_removed = mask.iter().zip(&is_mover).filter(|(g, m)| **g && !**m).count();
        let mover_kept = mask.iter().zip(&is_mover).filter(|(g, m)| !**g && **m).count();
        assert!(plane_removed as f64 >= 0.95 * 6000.0, "{plane_removed}");
        assert!(mover_kept as f64 >= 0.95 * 1500.0, "{mover_kept}");
    }

    #[test]
    fn object_only_cell_is_not_ground() {
        // A cell with nothing but a wall top must not become the ground.
        let mut pts = Vec::new();
        for i in 0..30 {
            for j in 0..30 {
                let (x, y) = (i as f64 * 0.3, j as f64 * 0.3);
                if (3.0..4.0).contains(&x) && (3.0..4.0).contains(&y) {
                    pts.push(Point::new(x, y, 1.5, 0.0));
                } else {
                    pts.push(Point::new(x, y, 0.0, 0.0));
                }
            }
        }
        let kept = remove_ground(&PointCloud::new(pts), &GroundConfig::default());
        assert!(!kept.is_empty());
        assert!(kept.iter().all(|p| p.z == 1.5));
    }
}
