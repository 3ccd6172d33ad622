//! Candidate offsets for the exact-match stage.

use crate::error::{Error, Result};

/// Integer offsets `(x, y)` (columns, rows) searched around one cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorSpace {
    pub bisector: (i32, i32),
    pub radius: usize,
    /// Unique, in row-major order (by `y`, then `x`); always contains `(0, 0)`.
    pub offsets: Vec<(i32, i32)>,
}

impl SectorSpace {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// Offsets within Euclidean distance `radius` whose angle to `bisector` is
/// at most 45 degrees, plus the zero offset. A zero bisector yields the full
/// disc.
pub fn build_sector(bisector: (i32, i32), radius: usize) -> Result<SectorSpace> {
    if radius < 1 {
        return Err(Error::Config("sector radius must be at least 1".into()));
    }
    let r = radius as i64;
    let (bx, by) = (bisector.0 as i64, bisector.1 as i64);
    let b2 = bx * bx + by * by;
    let mut offsets = Vec::new();
    for y in -r..=r {
        for x in -r..=r {
            let n2 = x * x + y * y;
            if n2 > r * r {
                continue;
            }
            let inside = n2 == 0 || b2 == 0 || {
                // cos(angle) >= cos(45) without floating point.
                let dot = x * bx + y * by;
                dot > 0 && 2 * dot * dot >= n2 * b2
            };
            if inside {
                offsets.push((x as i32, y as i32));
            }
        }
    }
    Ok(SectorSpace {
        bisector,
        radius,
        offsets,
    })
}

/// Full disc of radius `radius`.
pub fn full_disc(radius: usize) -> Result<SectorSpace> {
    build_sector((0, 0), radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_radius_axis_bisector() {
        assert_eq!(build_sector((1, 0), 1).unwrap().offsets, vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn zero_bisector_is_full_disc() {
        let d = build_sector((0, 0), 10).unwrap();
        let brute = (-10i32..=10)
            .flat_map(|y| (-10i32..=10).map(move |x| (x, y)))
            .filter(|(x, y)| x * x + y * y <= 100)
            .count();
        assert_eq!(d.len(), brute);
    }

    #[test]
    fn quarter_of_the_disc() {
        let disc = full_disc(10).unwrap().len() as f64;
        for b in [(1, 0), (0, -1), (1, 1), (-1, 1), (3, 1)] {
            let s = build_sector(b, 10).unwrap().len() as f64;
            let ratio = s / disc;
            assert!((0.2..=0.3).contains(&ratio), "{b:?}: {ratio}");
        }
    }

    #[test]
    fn offsets_match_float_angle_oracle() {
        for b in [(1, 0), (2, -1), (-1, -1), (0, 3)] {
            let s = build_sector(b, 7).unwrap();
            let bn = ((b.0 * b.0 + b.1 * b.1) as f64).sqrt();
            for y in -7i32..=7 {
                for x in -7i32..=7 {
                    let n = ((x * x + y * y) as f64).sqrt();
                    if n > 7.0 {
                        continue;
                    }
                    let want = n == 0.0 || {
                        let cos = (x * b.0 + y * b.1) as f64 / (n * bn);
                        cos >= std::f64::consts::FRAC_1_SQRT_2 - 1e-12
                    };
                    assert_eq!(s.offsets.contains(&(x, y)), want, "{b:?} ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn row_major_and_unique() {
        let s = build_sector((-1, 1), 10).unwrap();
        let mut sorted = s.offsets.clone();
        sorted.sort_by_key(|&(x, y)| (y, x));
        sorted.dedup();
        assert_eq!(sorted, s.offsets);
    }

    #[test]
    fn radius_zero_rejected() {
        assert!(build_sector((1, 0), 0).is_err());
    }
}
