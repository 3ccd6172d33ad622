//! Seeded synthetic Lidar sequences with exact ground truth.
//!
//! The world frame is the sensor frame of frame 0 with the ground plane at
//! `z = -sensor_height`. Objects are boxes resting on the ground (optionally
//! lifted by `clearance`). Each frame samples points uniformly over the box
//! faces that face the sensor, plus a ground disc; point density falls off
//! with the square of range beyond 10 m. Jitter is Gaussian, truncated at
//! three sigma, and applied along the face normal for box points and along
//! z for ground points.
//!
//! Scene descriptions are TOML:
//!
//! ```toml
//! seed = 7
//! frames = 12
//! cadence_hz = 10.0
//! jitter_sigma = 0.01
//! sensor_height = 1.73
//!
//! [ego]
//! speed = 5.0      # m/s along the sensor heading
//! yaw_rate = 0.0   # rad/s
//!
//! [[static]]
//! category = "other"
//! center = [20.0, 8.0]      # world x, y at t = 0
//! size = [2.0, 0.5, 12.0]   # h, w, l
//! yaw = 0.0
//! density = 300.0           # points per m^2 at 10 m
//!
//! [[mover]]
//! category = "car"
//! center = [15.0, -4.0]
//! size = [1.5, 1.6, 3.9]
//! yaw = 0.0
//! velocity = [8.0, 0.0]     # m/s, world frame
//! density = 300.0
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use nalgebra::Vector4;

use crate::boxfit::Box3D;
use crate::error::{Error, Result};
use crate::preprocess::BevConfig;
use crate::scene_io::{Category, Frame, FrameSequence, ObjectLabel, Point, PointCloud, PoseRecord};

/// Range below which point density is constant.
pub const REFERENCE_RANGE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default)]
    pub seed: u64,
    pub frames: usize,
    #[serde(default = "default_cadence")]
    pub cadence_hz: f64,
    #[serde(default)]
    pub jitter_sigma: f64,
    #[serde(default = "default_sensor_height")]
    pub sensor_height: f64,
    #[serde(default)]
    pub ground: GroundSpec,
    #[serde(default)]
    pub ego: EgoSpec,
    #[serde(default)]
    pub geodetic_origin: GeodeticOrigin,
    #[serde(default, rename = "static")]
    pub statics: Vec<ObjectSpec>,
    #[serde(default, rename = "mover")]
    pub movers: Vec<ObjectSpec>,
}

fn default_cadence() -> f64 {
    10.0
}

fn default_sensor_height() -> f64 {
    1.73
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundSpec {
    pub radius: f64,
    /// Points per m^2 inside the reference range.
    pub density: f64,
}

impl Default for GroundSpec {
    fn default() -> Self {
        Self {
            radius: 50.0,
            density: 4.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoSpec {
    #[serde(default)]
    pub speed: f64,
    #[serde(default)]
    pub yaw_rate: f64,
}

/// Geodetic anchor used when writing poses as oxts records.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodeticOrigin {
    pub lat: f64,
    pub lon: f64,
    pub alt: f64,
}

impl Default for GeodeticOrigin {
    fn default() -> Self {
        Self {
            lat: 49.011,
            lon: 8.4229,
            alt: 112.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub category: Category,
    /// World `(x, y)` of the box center at t = 0.
    pub center: [f64; 2],
    /// `(h, w, l)` in meters.
    pub size: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
    /// World-frame velocity, m/s.
    #[serde(default)]
    pub velocity: [f64; 2],
    /// Points per m^2 of visible face inside the reference range.
    pub density: f64,
    /// Gap between the ground and the box bottom.
    #[serde(default)]
    pub clearance: f64,
}

impl ObjectSpec {
    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

impl SceneSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: SceneSpec = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::MalformedLine {
                line,
                reason: e.message().to_string(),
            }
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scene spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::Validation("frames must be at least 1".into()));
        }
        if !(self.cadence_hz > 0.0) {
            return Err(Error::Validation("cadence_hz must be positive".into()));
        }
        if !(self.jitter_sigma >= 0.0) {
            return Err(Error::Validation("jitter_sigma must be nonnegative".into()));
        }
        if !(self.ground.density >= 0.0) || !(self.ground.radius >= 0.0) {
            return Err(Error::Validation("ground radius and density must be nonnegative".into()));
        }
        for (kind, objs) in [("static", &self.statics), ("mover", &self.movers)] {
            for (i, o) in objs.iter().enumerate() {
                if !(o.density > 0.0) {
                    return Err(Error::Validation(format!(
                        "{kind} object {i}: density must be positive, got {}",
                        o.density
                    )));
                }
                if !o.size.iter().all(|&d| d > 0.0) {
                    return Err(Error::Validation(format!(
                        "{kind} object {i}: size must be positive"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Where a generated point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSource {
    Ground,
    /// Track id of the object.
    Object(i64),
}

#[derive(Debug, Clone)]
pub struct SyntheticSequence {
    pub sequence: FrameSequence,
    /// Per frame, per point.
    pub sources: Vec<Vec<PointSource>>,
    /// Object-frame occurrences dropped because the object center left the
    /// grid extent.
    pub truncated: usize,
}

fn ego_pose(spec: &SceneSpec, t: f64) -> PoseRecord {
    let v = spec.ego.speed;
    let w = spec.ego.yaw_rate;
    let (x, y) = if w.abs() < 1e-12 {
        (v * t, 0.0)
    } else {
        (v / w * (w * t).sin(), v / w * (1.0 - (w * t).cos()))
    };
    PoseRecord::planar(t, x, y, 0.0, w * t)
}

/// Box of `obj` at time `t` in the world frame.
fn world_box(spec: &SceneSpec, obj: &ObjectSpec, t: f64) -> Box3D {
    let [h, w, l] = obj.size;
    let z = -spec.sensor_height + obj.clearance + h / 2.0;
    Box3D::new(
        [
            obj.center[0] + obj.velocity[0] * t,
            obj.center[1] + obj.velocity[1] * t,
            z,
        ],
        h,
        w,
        l,
        obj.yaw,
    )
    .expect("validated dimensions")
}

fn to_sensor(pose: &PoseRecord, b: &Box3D) -> Box3D {
    let inv = pose.inverse_transform();
    let c = inv * Vector4::new(b.center[0], b.center[1], b.center[2], 1.0);
    Box3D::new([c.x, c.y, c.z], b.h, b.w, b.l, b.yaw - pose.yaw()).expect("valid box")
}

impl SceneSpec {
    /// Sensor pose at frame `frame`.
    pub fn ego_pose_at(&self, frame: usize) -> PoseRecord {
        ego_pose(self, frame as f64 / self.cadence_hz)
    }

    /// Box of `obj` at frame `frame`, in that frame's sensor coordinates.
    pub fn sensor_box(&self, obj: &ObjectSpec, frame: usize) -> Box3D {
        let t = frame as f64 / self.cadence_hz;
        to_sensor(&ego_pose(self, t), &world_box(self, obj, t))
    }
}

fn density_at(base: f64, range: f64) -> f64 {
    let r = range.max(REFERENCE_RANGE);
    base * (REFERENCE_RANGE / r).powi(2)
}

struct Jitter {
    normal: Option<Normal<f64>>,
    limit: f64,
}

impl Jitter {
    fn new(sigma: f64) -> Self {
        Self {
            normal: (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma")),
            limit: 3.0 * sigma,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match &self.normal {
            Some(n) => n.sample(rng).clamp(-self.limit, self.limit),
            None => 0.0,
        }
    }
}

/// Samples the sensor-facing faces of `b` (sensor at the origin).
fn sample_box(
    b: &Box3D,
    density: f64,
    jitter: &Jitter,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<Point>,
) {
    let (s, c) = b.yaw.sin_cos();
    let u = [c, s, 0.0];
    let v = [-s, c, 0.0];
    let z = [0.0, 0.0, 1.0];
    let half = [b.l / 2.0, b.w / 2.0, b.h / 2.0];
    let axes = [u, v, z];
    for (ax, normal) in axes.iter().enumerate() {
        for sign in [1.0, -1.0] {
            let n = normal.map(|k| k * sign);
            let fc: [f64; 3] =
                std::array::from_fn(|k| b.center[k] + n[k] * half[ax]);
            // Visible when the sensor lies on the outward side of the face.
            let facing = -(fc[0] * n[0] + fc[1] * n[1] + fc[2] * n[2]);
            if facing <= 0.0 {
                continue;
            }
            let (t1, t2) = match ax {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let (a, bb) = (half[t1], half[t2]);
            let area = 4.0 * a * bb;
            let range = fc[0].hypot(fc[1]);
            let count = (area * density_at(density, range)).round() as usize;
            for _ in 0..count {
                let p1 = rng.random_range(-a..=a);
                let p2 = rng.random_range(-bb..=bb);
                let d = jitter.sample(rng);
                let p: [f64; 3] = std::array::from_fn(|k| {
                    fc[k] + axes[t1][k] * p1 + axes[t2][k] * p2 + n[k] * d
                });
                out.push(Point::new(p[0], p[1], p[2], rng.random_range(0.0..1.0)));
            }
        }
    }
}

fn sample_ground(
    spec: &SceneSpec,
    boxes: &[Box3D],
    jitter: &Jitter,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<Point>,
) {
    let d0 = spec.ground.density;
    let radius = spec.ground.radius;
    if d0 <= 0.0 || radius <= 0.0 {
        return;
    }
    let inner = REFERENCE_RANGE.min(radius);
    let n_inner = (d0 * std::f64::consts::PI * inner * inner).round() as usize;
    let n_outer = if radius > REFERENCE_RANGE {
        (d0 * REFERENCE_RANGE * REFERENCE_RANGE * std::f64::consts::TAU
            * (radius / REFERENCE_RANGE).ln())
        .round() as usize
    } else {
        0
    };
    let z = -spec.sensor_height;
    for i in 0..n_inner + n_outer {
        let u: f64 = rng.random_range(0.0..1.0);
        let r = if i < n_inner {
            inner * u.sqrt()
        } else {
            REFERENCE_RANGE * (radius / REFERENCE_RANGE).powf(u)
        };
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let (x, y) = (r * theta.cos(), r * theta.sin());
        let intensity = rng.random_range(0.0..1.0);
        let dz = jitter.sample(rng);
        if boxes.iter().any(|b| b.contains_bev(x, y)) {
            continue;
        }
        out.push(Point::new(x, y, z + dz, intensity));
    }
}

/// Generates the sequence described by `spec`. Objects whose center leaves
/// `extent` in some frame are dropped from that frame (points and label) and
/// counted in [`SyntheticSequence::truncated`].
pub fn generate_synthetic_scene(spec: &SceneSpec, extent: &BevConfig) -> Result<SyntheticSequence> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let jitter = Jitter::new(spec.jitter_sigma);
    let mut frames = Vec::with_capacity(spec.frames);
    let mut sources = Vec::with_capacity(spec.frames);
    let mut truncated = 0;

    let objects: Vec<(i64, &ObjectSpec)> = spec
        .statics
        .iter()
        .chain(spec.movers.iter())
        .enumerate()
        .map(|(i, o)| (i as i64, o))
        .collect();

    for f in 0..spec.frames {
        let t = f as f64 / spec.cadence_hz;
        let pose = ego_pose(spec, t);
        let mut points = Vec::new();
        let mut src = Vec::new();
        let mut labels = Vec::new();
        let mut boxes = Vec::new();
        for &(track_id, obj) in &objects {
            let sb = to_sensor(&pose, &world_box(spec, obj, t));
            if !extent.contains(sb.center[0], sb.center[1]) {
                log::warn!("frame {f}: object {track_id} outside grid extent, truncated");
                truncated += 1;
                continue;
            }
            let before = points.len();
            sample_box(&sb, obj.density, &jitter, &mut rng, &mut points);
            src.extend(std::iter::repeat_n(
                PointSource::Object(track_id),
                points.len() - before,
            ));
            labels.push(ObjectLabel {
                frame_index: f,
                category: obj.category,
                bbox: sb,
                track_id,
                is_moving: obj.speed() > 0.0,
            });
            boxes.push(sb);
        }
        let before = points.len();
        sample_ground(spec, &boxes, &jitter, &mut rng, &mut points);
        src.extend(std::iter::repeat_n(PointSource::Ground, points.len() - before));
        frames.push(Frame {
            cloud: PointCloud::new(points),
            pose,
            labels,
        });
        sources.push(src);
    }
    let sequence = FrameSequence::new(frames, spec.cadence_hz)?;
    Ok(SyntheticSequence {
        sequence,
        sources,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::compensate_ego_motion;

    fn base_spec() -> SceneSpec {
        SceneSpec::from_toml(
            r#"
            seed = 3
            frames = 4
            jitter_sigma = 0.02
            [ground]
            radius = 30.0
            density = 1.0
            [[static]]
            category = "other"
            center = [20.0, 6.0]
            size = [2.0, 1.0, 6.0]
            density = 200.0
            "#,
        )
        .unwrap()
    }

    #[test]
    fn static_world_has_no_moving_labels() {
        let s = generate_synthetic_scene(&base_spec(), &BevConfig::default()).unwrap();
        assert_eq!(s.sequence.frames.len(), 4);
        assert!(s
            .sequence
            .frames
            .iter()
            .flat_map(|f| &f.labels)
            .all(|l| !l.is_moving));
    }

    #[test]
    fn mover_advances_exactly() {
        let mut spec = base_spec();
        spec.movers.push(ObjectSpec {
            category: Category::Car,
            center: [10.0, -5.0],
            size: [1.5, 1.6, 3.9],
            yaw: 0.0,
            velocity: [2.0, 0.0],
            density: 100.0,
            clearance: 0.0,
        });
        let s = generate_synthetic_scene(&spec, &BevConfig::default()).unwrap();
        let xs: Vec<f64> = s
            .sequence
            .frames
            .iter()
            .map(|f| f.labels.iter().find(|l| l.is_moving).unwrap().bbox.center[0])
            .collect();
        for w in xs.windows(2) {
            assert!((w[1] - w[0] - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn compensated_static_points_stay_on_the_box() {
        let mut spec = base_spec();
        spec.ego.speed = 5.0;
        spec.ego.yaw_rate = 0.2;
        let sigma = spec.jitter_sigma;
        let s = generate_synthetic_scene(&spec, &BevConfig::default()).unwrap();
        let frames = &s.sequence.frames;
        for t in 1..frames.len() {
            let prev = &frames[t - 1];
            let cur = &frames[t];
            let comp = compensate_ego_motion(&prev.cloud, &prev.pose, &cur.pose).unwrap();
            let b = cur.labels[0].bbox;
            let (sn, cs) = b.yaw.sin_cos();
            for (p, src) in comp.points.iter().zip(&s.sources[t - 1]) {
                if *src != PointSource::Object(0) {
                    continue;
                }
                let dx = p.x - b.center[0];
                let dy = p.y - b.center[1];
                let local = [
                    (cs * dx + sn * dy).abs() - b.l / 2.0,
                    (-sn * dx + cs * dy).abs() - b.w / 2.0,
                    (p.z - b.center[2]).abs() - b.h / 2.0,
                ];
                // Distance to the surface is the largest face offset.
                let off = local.iter().cloned().fold(f64::MIN, f64::max);
                assert!(off.abs() <= 3.0 * sigma + 1e-9, "offset {off}");
            }
        }
    }

    #[test]
    fn nonpositive_density_rejected() {
        let mut spec = base_spec();
        spec.statics[0].density = 0.0;
        assert!(matches!(spec.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn schema_error_has_line_number() {
        let err = SceneSpec::from_toml("frames = 3\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn leaving_extent_truncates() {
        let mut spec = base_spec();
        spec.frames = 3;
        spec.movers.push(ObjectSpec {
            category: Category::Car,
            center: [59.5, 0.0],
            size: [1.5, 1.6, 3.9],
            yaw: 0.0,
            velocity: [10.0, 0.0],
            density: 100.0,
            clearance: 0.0,
        });
        let s = generate_synthetic_scene(&spec, &BevConfig::default()).unwrap();
        assert_eq!(s.truncated, 2);
        assert_eq!(s.sequence.frames[2].labels.len(), 1);
    }
}
