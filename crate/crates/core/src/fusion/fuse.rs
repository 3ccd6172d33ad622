//! Max-pooling of motion fields measured over different frame intervals.

use serde::{Deserialize, Serialize};

use crate::emd::MotionField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    /// Number of frame pairs `(t, t-k)`, `k = 1..=num_frames`.
    pub num_frames: usize,
    /// Compare candidates by displacement per frame (`|v| / k`) rather than
    /// raw displacement.
    pub normalize_by_interval: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            num_frames: 3,
            normalize_by_interval: true,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_frames < 1 {
            return Err(Error::Config("fusion num_frames must be at least 1".into()));
        }
        Ok(())
    }
}

/// Fuses per-interval fields into one field in cells per frame.
///
/// A cell is moving if any input marks it moving. Its vector is taken from
/// the input with the largest comparison magnitude (ties go to the earlier
/// input) and divided by that input's interval. With a single input of
/// interval 1 the output equals the input.
pub fn fuse_multiframe(fields: &[MotionField], cfg: &FusionConfig) -> Result<MotionField> {
    let first = fields
        .first()
        .ok_or_else(|| Error::Validation("fusion needs at least one field".into()))?;
    let shape = first.shape();
    if let Some(f) = fields.iter().find(|f| f.shape() != shape) {
        return Err(Error::Validation(format!(
            "fused fields differ in shape: {:?} vs {:?}",
            shape,
            f.shape()
        )));
    }
    if fields.iter().any(|f| f.interval == 0) {
        return Err(Error::Validation("field interval must be at least 1".into()));
    }
    let mut out = first.clone();
    out.interval = 1;
    for (r, c, _) in first.moving.indexed_iter() {
        let mut best: Option<(f64, [f64; 2], f64)> = None;
        for f in fields {
            if !f.moving[(r, c)] {
                continue;
            }
            let Some(v) = f.vectors[(r, c)] else { continue };
            let k = f.interval as f64;
            let key = if cfg.normalize_by_interval {
                v[0].hypot(v[1]) / k
            } else {
                v[0].hypot(v[1])
            };
            if best.is_none_or(|b| key > b.0) {
                best = Some((key, [v[0] / k, v[1] / k], f.score[(r, c)] / k));
            }
        }
        out.rough[(r, c)] = fields.iter().any(|f| f.rough[(r, c)]);
        match best {
            Some((_, v, s)) => {
                out.moving[(r, c)] = true;
                out.vectors[(r, c)] = Some(v);
                out.score[(r, c)] = s;
            }
            None => {
                out.moving[(r, c)] = false;
                out.vectors[(r, c)] = None;
                out.score[(r, c)] = first.score[(r, c)] / first.interval as f64;
            }
        }
    }
    Ok(out)
}
