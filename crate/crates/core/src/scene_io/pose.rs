//! Ego poses from oxts-style GNSS/IMU records.
//!
//! Records are projected with the scaled Mercator mapping used by the KITTI
//! devkit (scale `cos(lat0)`), then expressed relative to the first record of
//! the sequence, so the first pose is the identity.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix4, Rotation3, Vector3, Vector4};

use crate::error::{Error, Result};

/// WGS84 equatorial radius in meters.
pub const EARTH_RADIUS: f64 = 6_378_137.0;

const ORTHONORMAL_TOL: f64 = 1e-6;

/// Sensor pose: homogeneous transform from the Lidar frame to a fixed
/// Earth-anchored metric frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRecord {
    pub timestamp: f64,
    pub transform: Matrix4<f64>,
}

impl PoseRecord {
    pub fn identity(timestamp: f64) -> Self {
        Self {
            timestamp,
            transform: Matrix4::identity(),
        }
    }

    pub fn from_rotation_translation(
        timestamp: f64,
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
    ) -> Self {
        let mut t = Matrix4::identity();
        t.fixed_view_mut::<3, 3>(0, 0).copy_from(&rotation);
        t.fixed_view_mut::<3, 1>(0, 3).copy_from(&translation);
        Self {
            timestamp,
            transform: t,
        }
    }

    /// Planar pose: yaw about +z and a translation.
    pub fn planar(timestamp: f64, x: f64, y: f64, z: f64, yaw: f64) -> Self {
        let r = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw);
        Self::from_rotation_translation(timestamp, *r.matrix(), Vector3::new(x, y, z))
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        self.transform.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.transform.fixed_view::<3, 1>(0, 3).into_owned()
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.transform;
        if !t.iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("pose contains non-finite entries".into()));
        }
        if t.row(3) != Vector4::new(0.0, 0.0, 0.0, 1.0).transpose() {
            return Err(Error::Validation(
                "pose last row must be (0, 0, 0, 1)".into(),
            ));
        }
        let r = self.rotation();
        let gram = r.transpose() * r - Matrix3::identity();
        if gram.amax() > ORTHONORMAL_TOL {
            return Err(Error::Validation(format!(
                "pose rotation is not orthonormal (max deviation {:.3e})",
                gram.amax()
            )));
        }
        let det = r.determinant();
        if (det - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::Validation(format!(
                "pose rotation determinant is {det}, expected +1"
            )));
        }
        Ok(())
    }

    /// Rigid inverse `[R^T | -R^T t]`.
    pub fn inverse_transform(&self) -> Matrix4<f64> {
        let rt = self.rotation().transpose();
        let t = -(rt * self.translation());
        let mut out = Matrix4::identity();
        out.fixed_view_mut::<3, 3>(0, 0).copy_from(&rt);
        out.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
        out
    }

    /// Transform taking points in `self`'s Lidar frame into `target`'s.
    pub fn relative_to(&self, target: &PoseRecord) -> Matrix4<f64> {
        target.inverse_transform() * self.transform
    }

    /// Heading of the sensor x axis in the Earth frame.
    pub fn yaw(&self) -> f64 {
        let r = self.rotation();
        r[(1, 0)].atan2(r[(0, 0)])
    }
}

/// The six oxts fields this crate consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OxtsRecord {
    /// Degrees.
    pub lat: f64,
    /// Degrees.
    pub lon: f64,
    /// Meters.
    pub alt: f64,
    /// Radians.
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl OxtsRecord {
    /// Parses the first six whitespace-separated fields of a record line.
    /// Field indices in errors are zero-based.
    pub fn parse(line: &str) -> Result<Self> {
        let mut fields = [0.0f64; 6];
        let mut tokens = line.split_whitespace();
        for (i, slot) in fields.iter_mut().enumerate() {
            let tok = tokens.next().ok_or_else(|| Error::MalformedField {
                field: i,
                reason: "record has fewer than 6 fields".into(),
            })?;
            let v: f64 = tok.parse().map_err(|_| Error::MalformedField {
                field: i,
                reason: format!("cannot parse {tok:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::MalformedField {
                    field: i,
                    reason: format!("non-finite value {tok:?}"),
                });
            }
            *slot = v;
        }
        let rec = Self {
            lat: fields[0],
            lon: fields[1],
            alt: fields[2],
            roll: fields[3],
            pitch: fields[4],
            yaw: fields[5],
        };
        if !(-90.0..=90.0).contains(&rec.lat) {
            return Err(Error::Validation(format!(
                "latitude {} outside [-90, 90]",
                rec.lat
            )));
        }
        Ok(rec)
    }

    pub fn to_line(&self) -> String {
        format!(
            "{} {} {} {} {} {}",
            self.lat, self.lon, self.alt, self.roll, self.pitch, self.yaw
        )
    }
}

/// Projection anchor: the first record of a sequence.
#[derive(Debug, Clone, Copy)]
pub struct GeoOrigin {
    pub record: OxtsRecord,
    scale: f64,
    absolute_inv: Matrix4<f64>,
    absolute: Matrix4<f64>,
}

impl GeoOrigin {
    pub fn new(record: OxtsRecord) -> Self {
        let scale = (record.lat * PI / 180.0).cos();
        let absolute = absolute_pose(&record, scale);
        let absolute_inv = PoseRecord {
            timestamp: 0.0,
            transform: absolute,
        }
        .inverse_transform();
        Self {
            record,
            scale,
            absolute_inv,
            absolute,
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Inverse of [`read_pose`] for roll/pitch/yaw-carrying poses. Used to
    /// write synthetic trajectories in the oxts layout.
    pub fn record_for(&self, pose: &PoseRecord) -> OxtsRecord {
        let abs = self.absolute * pose.transform;
        let r = abs.fixed_view::<3, 3>(0, 0).into_owned();
        let yaw = r[(1, 0)].atan2(r[(0, 0)]);
        let pitch = (-r[(2, 0)]).clamp(-1.0, 1.0).asin();
        let roll = r[(2, 1)].atan2(r[(2, 2)]);
        let (mx, my, alt) = (abs[(0, 3)], abs[(1, 3)], abs[(2, 3)]);
        let lon = mx * 180.0 / (PI * EARTH_RADIUS * self.scale);
        let lat = 360.0 / PI * (my / (EARTH_RADIUS * self.scale)).exp().atan() - 90.0;
        OxtsRecord {
            lat,
            lon,
            alt,
            roll,
            pitch,
            yaw,
        }
    }
}

fn absolute_pose(rec: &OxtsRecord, scale: f64) -> Matrix4<f64> {
    let tx = scale * rec.lon * PI * EARTH_RADIUS / 180.0;
    let ty = scale * EARTH_RADIUS * ((90.0 + rec.lat) * PI / 360.0).tan().ln();
    let r = Rotation3::from_axis_angle(&Vector3::z_axis(), rec.yaw)
        * Rotation3::from_axis_angle(&Vector3::y_axis(), rec.pitch)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), rec.roll);
    PoseRecord::from_rotation_translation(0.0, *r.matrix(), Vector3::new(tx, ty, rec.alt))
        .transform
}

/// Converts one oxts line into a pose relative to `origin`. The timestamp is
/// left at zero; [`read_pose_file`] assigns timestamps from the cadence.
pub fn read_pose(line: &str, origin: &GeoOrigin) -> Result<PoseRecord> {
    let rec = OxtsRecord::parse(line)?;
    let abs = absolute_pose(&rec, origin.scale);
    Ok(PoseRecord {
        timestamp: 0.0,
        transform: origin.absolute_inv * abs,
    })
}

/// Reads a whole oxts text (one record per line, blank lines skipped). The
/// first record anchors the projection.
pub fn read_pose_file(text: &str, cadence_hz: f64) -> Result<Vec<PoseRecord>> {
    let mut origin = None;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let wrap = |e: Error| Error::MalformedLine {
            line: lineno + 1,
            reason: e.to_string(),
        };
        let origin = match origin {
            Some(o) => o,
            None => {
                let o = GeoOrigin::new(OxtsRecord::parse(line).map_err(wrap)?);
                origin = Some(o);
                o
            }
        };
        let mut pose = read_pose(line, &origin).map_err(wrap)?;
        pose.timestamp = out.len() as f64 / cadence_hz;
        out.push(pose);
    }
    Ok(out)
}
