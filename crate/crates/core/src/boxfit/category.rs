//! Size-prior category heuristic for fitted boxes. This is a nearest-mean
//! rule on `(h, w, l)`, not a classifier.

use crate::boxfit::Box3D;
use crate::scene_io::Category;

/// Mean `(h, w, l)` per category.
pub const SIZE_PRIORS: [(Category, [f64; 3]); 3] = [
    (Category::Car, [1.5, 1.6, 3.9]),
    (Category::Pedestrian, [1.75, 0.6, 0.8]),
    (Category::Cyclist, [1.7, 0.6, 1.8]),
];

pub fn classify_by_size(b: &Box3D) -> Category {
    let d = |p: &[f64; 3]| (b.h - p[0]).powi(2) + (b.w - p[1]).powi(2) + (b.l - p[2]).powi(2);
    SIZE_PRIORS
        .iter()
        .min_by(|x, y| d(&x.1).total_cmp(&d(&y.1)))
        .map(|x| x.0)
        .expect("nonempty priors")
}
