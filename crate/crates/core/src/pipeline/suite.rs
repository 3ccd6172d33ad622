//! The standard seeded synthetic suite: 20 short scenes with ego motion,
//! static clutter and movers from 0.5 to 15 m/s.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::boxfit::Box3D;
use crate::scene_io::{Category, EgoSpec, GroundSpec, ObjectSpec, SceneSpec};

pub const SUITE_SCENES: usize = 20;
pub const SUITE_SEED: u64 = 20_240_521;
pub const SUITE_FRAMES: usize = 12;
/// Frames before this index lack a full fusion history and are not scored.
pub const SUITE_FIRST_SCORED: usize = 3;
/// Movers at or below this speed form the slow subset.
pub const SLOW_SPEED: f64 = 1.0;

/// Placement limits in the sensor frame over the whole scene.
const X_RANGE: (f64, f64) = (4.0, 38.0);
const Y_LIMIT: f64 = 15.0;
const GAP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteScene {
    pub name: String,
    pub spec: SceneSpec,
}

fn size_of(c: Category) -> [f64; 3] {
    match c {
        Category::Car => [1.5, 1.6, 3.9],
        Category::Pedestrian => [1.75, 0.6, 0.8],
        Category::Cyclist => [1.7, 0.6, 1.8],
        Category::Other => [3.0, 1.0, 10.0],
    }
}

fn overlaps(a: &Box3D, b: &Box3D) -> bool {
    let reach = (a.l.hypot(a.w) + b.l.hypot(b.w)) / 2.0 + GAP;
    (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]) < reach
}

fn fits(spec: &SceneSpec, obj: &ObjectSpec, placed: &[ObjectSpec]) -> bool {
    (0..spec.frames).all(|f| {
        let b = spec.sensor_box(obj, f);
        let (x, y) = (b.center[0], b.center[1]);
        x >= X_RANGE.0
            && x <= X_RANGE.1
            && y.abs() <= Y_LIMIT
            && placed.iter().all(|o| !overlaps(&b, &spec.sensor_box(o, f)))
    })
}

fn place(
    rng: &mut ChaCha8Rng,
    spec: &SceneSpec,
    placed: &[ObjectSpec],
    mut make: impl FnMut(&mut ChaCha8Rng) -> ObjectSpec,
) -> Option<ObjectSpec> {
    (0..2000).map(|_| make(rng)).find(|o| fits(spec, o, placed))
}

/// Builds scene `index` of the suite seeded by `seed`.
pub fn suite_scene(seed: u64, index: usize) -> SuiteScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(index as u64));
    let mut spec = SceneSpec {
        seed: rng.random(),
        frames: SUITE_FRAMES,
        cadence_hz: 10.0,
        jitter_sigma: 0.02,
        sensor_height: 1.73,
        ground: GroundSpec {
            radius: 50.0,
            density: 4.0,
        },
        ego: EgoSpec {
            speed: rng.random_range(0.0..10.0),
            yaw_rate: rng.random_range(-0.1..0.1),
        },
        geodetic_origin: Default::default(),
        statics: vec![],
        movers: vec![],
    };
    let density = 1000.0;

    // A long wall on one side and two parked cars.
    let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut statics = vec![ObjectSpec {
        category: Category::Other,
        center: [rng.random_range(15.0..25.0), side * rng.random_range(11.0..14.0)],
        size: [3.0, 1.0, rng.random_range(8.0..14.0)],
        yaw: 0.0,
        velocity: [0.0, 0.0],
        density,
        clearance: 0.0,
    }];
    for _ in 0..2 {
        let all: Vec<_> = statics.clone();
        if let Some(o) = place(&mut rng, &spec, &all, |r| ObjectSpec {
            category: Category::Car,
            center: [r.random_range(8.0..45.0), r.random_range(-12.0..12.0)],
            size: size_of(Category::Car),
            yaw: r.random_range(0.0..std::f64::consts::PI),
            velocity: [0.0, 0.0],
            density,
            clearance: 0.0,
        }) {
            statics.push(o);
        }
    }

    // Movers: a car, a car or cyclist, and a pedestrian that is slow in
    // every other scene.
    let kinds = [
        (Category::Car, 2.0, 15.0),
        if rng.random_bool(0.5) {
            (Category::Cyclist, 2.0, 7.0)
        } else {
            (Category::Car, 2.0, 12.0)
        },
        if index % 2 == 0 {
            (Category::Pedestrian, 0.5, SLOW_SPEED)
        } else {
            (Category::Pedestrian, 1.0, 2.0)
        },
    ];
    let mut movers: Vec<ObjectSpec> = Vec::new();
    for (cat, lo, hi) in kinds {
        let all: Vec<_> = statics.iter().chain(&movers).cloned().collect();
        let made = place(&mut rng, &spec, &all, |r| {
            let speed = r.random_range(lo..=hi);
            let heading = r.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            ObjectSpec {
                category: cat,
                center: [r.random_range(5.0..45.0), r.random_range(-13.0..13.0)],
                size: size_of(cat),
                yaw: heading,
                velocity: [speed * heading.cos(), speed * heading.sin()],
                density,
                clearance: 0.0,
            }
        });
        if let Some(o) = made {
            movers.push(o);
        }
    }
    spec.statics = statics;
    spec.movers = movers;
    SuiteScene {
        name: format!("scene_{index:02}"),
        spec,
    }
}

/// All scenes of the suite.
pub fn standard_suite(seed: u64) -> Vec<SuiteScene> {
    (0..SUITE_SCENES).map(|i| suite_scene(seed, i)).collect()
}
