//! Zero-sum ring filter that cancels motion shared with the surroundings.

use crate::emd::{InhibitionKernel, MotionField};
use crate::error::Result;
use crate::grid::Grid;

/// Filter response at one cell: `p * v(c) + q * (sum of v over the ring)`,
/// with zero padding.
pub fn filter_at(v: &Grid<f64>, kernel: &InhibitionKernel, row: usize, col: usize) -> f64 {
    let h = (kernel.size / 2) as isize;
    let (r, c) = (row as isize, col as isize);
    let mut ring = 0.0;
    for d in -h..=h {
        ring += v.at_or_zero(r - h, c + d) + v.at_or_zero(r + h, c + d);
    }
    for d in -h + 1..h {
        ring += v.at_or_zero(r + d, c - h) + v.at_or_zero(r + d, c + h);
    }
    kernel.center * v[(row, col)] + kernel.border * ring
}

/// Full convolution of one component.
pub fn inhibit_component(v: &Grid<f64>, kernel: &InhibitionKernel) -> Grid<f64> {
    Grid::from_fn(v.rows(), v.cols(), |r, c| filter_at(v, kernel, r, c))
}

/// Splits the field into `v_x`, `v_y` (zero where undefined), filters both,
/// and keeps a moving cell only if `|filtered| / p >= threshold`. Dividing
/// by the center weight expresses the response in cells, so an isolated
/// vector keeps its own magnitude. Surviving cells keep their input vector;
/// `score` holds the normalized filtered magnitude.
pub fn lateral_inhibition(
    field: &MotionField,
    kernel: &InhibitionKernel,
    threshold: f64,
) -> Result<MotionField> {
    kernel.validate()?;
    let (rows, cols) = field.vectors.shape();
    let comp = |k: usize| {
        Grid::from_fn(rows, cols, |r, c| field.vectors[(r, c)].map_or(0.0, |v| v[k]))
    };
    let (vx, vy) = (comp(0), comp(1));
    let mut out = field.clone();
    for r in 0..rows {
        for c in 0..cols {
            if !field.moving[(r, c)] {
                out.vectors[(r, c)] = None;
                out.score[(r, c)] = 0.0;
                continue;
            }
            let fx = filter_at(&vx, kernel, r, c);
            let fy = filter_at(&vy, kernel, r, c);
            let mag = fx.hypot(fy) / kernel.center;
            out.score[(r, c)] = mag;
            if mag < threshold {
                out.moving[(r, c)] = false;
                out.vectors[(r, c)] = None;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Dense convolution oracle.
    fn dense_conv(v: &Grid<f64>, k: &InhibitionKernel) -> Grid<f64> {
        let d = k.dense();
        let l = k.size as isize;
        let h = l / 2;
        Grid::from_fn(v.rows(), v.cols(), |r, c| {
            let mut acc = 0.0;
            for i in 0..l {
                for j in 0..l {
                    acc += d[(i * l + j) as usize]
                        * v.at_or_zero(r as isize + i - h, c as isize + j - h);
                }
            }
            acc
        })
    }

    #[test]
    fn uniform_field_vanishes_in_interior() {
        let k = InhibitionKernel::default();
        let v = Grid::filled(40, 40, 1.7);
        let f = inhibit_component(&v, &k);
        for r in 7..33 {
            for c in 7..33 {
                assert!(f[(r, c)].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn isolated_unit_vector_gives_center_weight() {
        let k = InhibitionKernel::default();
        let mut v = Grid::new(31, 31);
        v[(15, 15)] = 1.0;
        assert_eq!(inhibit_component(&v, &k)[(15, 15)], 0.56);
    }

    #[test]
    fn matches_dense_convolution_and_is_linear() {
        let k = InhibitionKernel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = Grid::from_fn(30, 34, |_, _| rng.random_range(-3.0..3.0));
        let f = inhibit_component(&v, &k);
        assert!(f.max_abs_diff(&dense_conv(&v, &k)) < 1e-12);
        let scaled = inhibit_component(&v.map(|x| 2.5 * x), &k);
        assert!(scaled.max_abs_diff(&f.map(|x| 2.5 * x)) < 1e-12);
    }

    #[test]
    fn suppresses_uniform_motion_keeps_isolated_mover() {
        let k = InhibitionKernel::default();
        let (rows, cols) = (40, 40);
        let mut field = MotionField::empty(rows, cols, 1);
        for r in 0..rows {
            for c in 0..cols {
                let mover = (17..23).contains(&r) && (17..23).contains(&c);
                field.vectors[(r, c)] = Some(if mover { [3.0, 0.0] } else { [1.0, 0.0] });
                field.moving[(r, c)] = true;
            }
        }
        let out = lateral_inhibition(&field, &k, 1.0).unwrap();
        assert!(!out.moving[(10, 10)]);
        assert!(out.moving[(20, 20)]);
        assert_eq!(out.vectors[(20, 20)], Some([3.0, 0.0]));
        assert_eq!(out.vectors[(10, 10)], None);
    }
}
