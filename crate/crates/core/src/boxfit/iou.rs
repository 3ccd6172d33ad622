//! Intersection-over-union of oriented boxes.

use serde::{Deserialize, Serialize};

use crate::boxfit::Box3D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IouMode {
    Bev,
    #[serde(rename = "3d")]
    ThreeD,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Shoelace area of a simple polygon; positive when counter-clockwise.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        / 2.0
}

/// Intersection of two convex counter-clockwise polygons (Sutherland-Hodgman).
pub fn clip_convex(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (cp, cq) = (cross(a, b, p), cross(a, b, q));
            if cp >= 0.0 {
                out.push(p);
            }
            if (cp >= 0.0) != (cq >= 0.0) {
                let t = cp / (cp - cq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
    }
    out
}

pub fn bev_intersection(a: &Box3D, b: &Box3D) -> f64 {
    let poly = clip_convex(&a.bev_corners(), &b.bev_corners());
    if poly.len() < 3 {
        0.0
    } else {
        polygon_area(&poly).max(0.0)
    }
}

/// IoU in `[0, 1]`.
pub fn iou(a: &Box3D, b: &Box3D, mode: IouMode) -> f64 {
    let inter = bev_intersection(a, b);
    let v = match mode {
        IouMode::Bev => {
            let union = a.bev_area() + b.bev_area() - inter;
            if union > 0.0 { inter / union } else { 0.0 }
        }
        IouMode::ThreeD => {
            let (a0, a1) = a.z_range();
            let (b0, b1) = b.z_range();
            let dz = (a1.min(b1) - a0.max(b0)).max(0.0);
            let inter = inter * dz;
            let union = a.volume() + b.volume() - inter;
            if union > 0.0 { inter / union } else { 0.0 }
        }
    };
    v.clamp(0.0, 1.0)
}
