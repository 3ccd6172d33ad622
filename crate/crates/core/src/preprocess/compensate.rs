use nalgebra::Vector4;

use crate::error::{Error, Result};
use crate::scene_io::{PointCloud, PoseRecord};

/// Re-expresses a cloud captured at `prev` in the Lidar frame of `curr`:
/// `p' = T_curr^-1 * T_prev * p`.
pub fn compensate_ego_motion(
    cloud: &PointCloud,
    prev: &PoseRecord,
    curr: &PoseRecord,
) -> Result<PointCloud> {
    prev.validate()?;
    curr.validate()
        .map_err(|e| Error::Internal(format!("current pose is not invertible: {e}")))?;
    if prev.transform == curr.transform {
        return Ok(cloud.clone());
    }
    let m = prev.relative_to(curr);
    Ok(cloud
        .iter()
        .map(|p| {
            let q = m * Vector4::new(p.x, p.y, p.z, 1.0);
            crate::scene_io::Point::new(q.x, q.y, q.z, p.intensity)
        })
        .collect())
}
