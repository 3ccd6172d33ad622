//! Box center from the rotated-projection procedure.
//!
//! The ground-plane points are rotated by each candidate angle, and the
//! frame with the tightest axis-aligned extents (smallest sum of squared
//! ranges) is kept. The center is the midpoint of those extents rotated
//! back; height is the mean point height. Unlike the centroid, the midpoint
//! does not drift toward densely sampled faces.

use crate::error::{Error, Result};
use crate::scene_io::PointCloud;

/// Candidate angles, radians.
pub const CENTER_ANGLES: [f64; 3] = [0.0, std::f64::consts::FRAC_PI_6, std::f64::consts::FRAC_PI_3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterEstimate {
    pub center: [f64; 3],
    /// Chosen angle, one of [`CENTER_ANGLES`].
    pub alpha: f64,
    /// Extents along the rotated x and y axes.
    pub ranges: [f64; 2],
}

/// Rotates `(x, y)` by `-alpha`.
#[inline]
pub(crate) fn to_frame(x: f64, y: f64, alpha: f64) -> (f64, f64) {
    let (s, c) = alpha.sin_cos();
    (c * x + s * y, -s * x + c * y)
}

/// Rotates `(x, y)` by `+alpha`.
#[inline]
pub(crate) fn from_frame(x: f64, y: f64, alpha: f64) -> (f64, f64) {
    let (s, c) = alpha.sin_cos();
    (c * x - s * y, s * x + c * y)
}

/// Min and max of the rotated coordinates: `[[xmin, xmax], [ymin, ymax]]`.
pub(crate) fn extents(points: &PointCloud, alpha: f64) -> [[f64; 2]; 2] {
    let mut e = [[f64::INFINITY, f64::NEG_INFINITY]; 2];
    for p in points.iter() {
        let (u, v) = to_frame(p.x, p.y, alpha);
        e[0] = [e[0][0].min(u), e[0][1].max(u)];
        e[1] = [e[1][0].min(v), e[1][1].max(v)];
    }
    e
}

pub fn estimate_center(points: &PointCloud) -> Result<CenterEstimate> {
    if points.is_empty() {
        return Err(Error::Validation("cannot estimate the center of no points".into()));
    }
    let mean_z = points.iter().map(|p| p.z).sum::<f64>() / points.len() as f64;
    let mut best: Option<(f64, f64, [[f64; 2]; 2])> = None;
    for &alpha in &CENTER_ANGLES {
        let e = extents(points, alpha);
        let (rx, ry) = (e[0][1] - e[0][0], e[1][1] - e[1][0]);
        let score = rx * rx + ry * ry;
        // Near-ties (up to rounding) keep the smaller angle.
        if best.is_none_or(|b| score < b.0 - 1e-9 * b.0.max(1e-12)) {
            best = Some((score, alpha, e));
        }
    }
    let (_, alpha, e) = best.expect("three candidates");
    let (mx, my) = ((e[0][0] + e[0][1]) / 2.0, (e[1][0] + e[1][1]) / 2.0);
    let (cx, cy) = from_frame(mx, my, alpha);
    Ok(CenterEstimate {
        center: [cx, cy, mean_z],
        alpha,
        ranges: [e[0][1] - e[0][0], e[1][1] - e[1][0]],
    })
}

/// Arithmetic mean of the points.
pub fn centroid(points: &PointCloud) -> Option<[f64; 3]> {
    if points.is_empty() {
        return None;
    }
    let n = points.len() as f64;
    let s = points.iter().fold([0.0; 3], |a, p| [a[0] + p.x, a[1] + p.y, a[2] + p.z]);
    Some([s[0] / n, s[1] / n, s[2] / n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene_io::Point;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Points on the boundary of an `l x w` rectangle centered at `c`,
    /// rotated by `yaw`, including the four corners.
    fn rectangle(c: [f64; 2], l: f64, w: f64, yaw: f64, n: usize) -> PointCloud {
        let mut local = vec![(l / 2.0, w / 2.0), (-l / 2.0, w / 2.0), (-l / 2.0, -w / 2.0), (l / 2.0, -w / 2.0)];
        for i in 0..n {
            let t = i as f64 / n as f64;
            local.push((-l / 2.0 + t * l, w / 2.0));
            local.push((-l / 2.0 + t * l, -w / 2.0));
            local.push((l / 2.0, -w / 2.0 + t * w));
            local.push((-l / 2.0, -w / 2.0 + t * w));
        }
        local
            .into_iter()
            .map(|(u, v)| {
                let (x, y) = from_frame(u, v, yaw);
                Point::new(c[0] + x, c[1] + y, 0.7, 0.0)
            })
            .collect()
    }

    #[test]
    fn axis_aligned_rectangle() {
        let e = estimate_center(&rectangle([3.0, -2.0], 4.0, 1.8, 0.0, 40)).unwrap();
        assert_eq!(e.alpha, 0.0);
        assert!((e.center[0] - 3.0).abs() < 1e-6 && (e.center[1] + 2.0).abs() < 1e-6);
        assert!((e.center[2] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn rotated_rectangles_pick_their_angle() {
        for (k, &a) in CENTER_ANGLES.iter().enumerate() {
            let e = estimate_center(&rectangle([10.0, 5.0], 4.0, 1.8, a, 40)).unwrap();
            assert_eq!(e.alpha, CENTER_ANGLES[k]);
            assert!((e.center[0] - 10.0).abs() < 1e-6 && (e.center[1] - 5.0).abs() < 1e-6);
        }
    }

    #[test]
    fn l_shape_beats_centroid() {
        // Dense long side, sparse short side, true center at (0, 0).
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pts = Vec::new();
        for _ in 0..200 {
            pts.push(Point::new(rng.random_range(-2.0..2.0), -0.9, 0.5, 0.0));
        }
        for _ in 0..15 {
            pts.push(Point::new(-2.0, rng.random_range(-0.9..0.9), 0.5, 0.0));
        }
        pts.push(Point::new(-2.0, 0.9, 0.5, 0.0));
        pts.push(Point::new(2.0, -0.9, 0.5, 0.0));
        let cloud = PointCloud::new(pts);
        let e = estimate_center(&cloud).unwrap();
        let c = centroid(&cloud).unwrap();
        assert!(e.center[0].hypot(e.center[1]) <= c[0].hypot(c[1]));
    }

    #[test]
    fn translation_equivariant_and_scale_invariant_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cloud: PointCloud = (0..50)
            .map(|_| Point::new(rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.0), rng.random_range(0.0..1.5), 0.0))
            .collect();
        let a = estimate_center(&cloud).unwrap();
        let moved: PointCloud = cloud.iter().map(|p| Point::new(p.x + 7.0, p.y - 3.0, p.z + 1.0, 0.0)).collect();
        let b = estimate_center(&moved).unwrap();
        assert_eq!(a.alpha, b.alpha);
        for (k, t) in [7.0, -3.0, 1.0].iter().enumerate() {
            assert!((b.center[k] - a.center[k] - t).abs() < 1e-9);
        }
        let scaled: PointCloud = cloud.iter().map(|p| Point::new(p.x * 3.0, p.y * 3.0, p.z, 0.0)).collect();
        assert_eq!(estimate_center(&scaled).unwrap().alpha, a.alpha);
    }

    #[test]
    fn single_point_and_empty() {
        let one = PointCloud::new(vec![Point::new(1.0, 2.0, 3.0, 0.0)]);
        let e = estimate_center(&one).unwrap();
        assert_eq!(e.alpha, 0.0);
        assert_eq!(e.center, [1.0, 2.0, 3.0]);
        assert!(matches!(estimate_center(&PointCloud::default()), Err(Error::Validation(_))));
    }
}
