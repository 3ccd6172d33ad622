//! Gathering the raw points behind each cluster.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fusion::Cluster;
use crate::preprocess::BevConfig;
use crate::scene_io::{read_point_cloud, write_point_cloud, PointCloud, RECORD_BYTES};

#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub frame_index: usize,
    pub cluster_id: usize,
    pub points: PointCloud,
    pub cluster: Cluster,
    /// Ground-plane velocity in m/s.
    pub velocity: [f64; 2],
}

impl Proposal {
    pub fn speed(&self) -> f64 {
        self.velocity[0].hypot(self.velocity[1])
    }
}

/// Converts cells per frame to m/s.
pub fn cells_to_velocity(v: [f64; 2], cell_size: f64, cadence_hz: f64) -> [f64; 2] {
    [v[0] * cell_size * cadence_hz, v[1] * cell_size * cadence_hz]
}

/// Membership mask of the cluster dilated by `expansion` cells (Chebyshev),
/// allowed to reach past the grid border.
struct Footprint {
    r0: i64,
    c0: i64,
    rows: i64,
    cols: i64,
    mask: Vec<bool>,
}

impl Footprint {
    fn new(cluster: &Cluster, expansion: usize) -> Self {
        let e = expansion as i64;
        let r0 = cluster.min_row as i64 - e;
        let c0 = cluster.min_col as i64 - e;
        let rows = cluster.max_row as i64 + e - r0 + 1;
        let cols = cluster.max_col as i64 + e - c0 + 1;
        let mut mask = vec![false; (rows * cols) as usize];
        for &(r, c) in &cluster.cells {
            for dr in -e..=e {
                for dc in -e..=e {
                    let (rr, cc) = (r as i64 + dr - r0, c as i64 + dc - c0);
                    mask[(rr * cols + cc) as usize] = true;
                }
            }
        }
        Self { r0, c0, rows, cols, mask }
    }

    fn contains(&self, cell: (i64, i64)) -> bool {
        let (r, c) = (cell.0 - self.r0, cell.1 - self.c0);
        r >= 0 && c >= 0 && r < self.rows && c < self.cols && self.mask[(r * self.cols + c) as usize]
    }
}

/// Points of `cloud` whose cell lies in the cluster's footprint dilated by
/// `expansion`. Returns `None` when no point qualifies.
pub fn extract_proposal_points(
    cluster: &Cluster,
    cloud: &PointCloud,
    bev: &BevConfig,
    expansion: usize,
    cadence_hz: f64,
) -> Option<Proposal> {
    if cluster.is_empty() {
        return None;
    }
    let fp = Footprint::new(cluster, expansion);
    let points: PointCloud = cloud
        .iter()
        .filter(|p| fp.contains(bev.cell_of_signed(p.x, p.y)))
        .copied()
        .collect();
    if points.is_empty() {
        return None;
    }
    Some(Proposal {
        frame_index: 0,
        cluster_id: 0,
        points,
        cluster: cluster.clone(),
        velocity: cells_to_velocity(cluster.mean_vector, bev.cell_size, cadence_hz),
    })
}

/// Header of one serialized proposal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalRecord {
    pub frame_index: usize,
    pub cluster_id: usize,
    pub velocity: [f64; 2],
    pub points: PointCloud,
}

/// Line records `frame cluster_id vx vy point_count byte_offset` plus the
/// sidecar blob of 16-byte point records they index into.
pub fn write_proposals(proposals: &[Proposal]) -> (String, Vec<u8>) {
    let mut text = String::from("# frame cluster vx vy points offset\n");
    let mut blob = Vec::new();
    for p in proposals {
        let _ = writeln!(
            text,
            "{} {} {} {} {} {}",
            p.frame_index,
            p.cluster_id,
            p.velocity[0],
            p.velocity[1],
            p.points.len(),
            blob.len()
        );
        blob.extend(write_point_cloud(&p.points));
    }
    (text, blob)
}

pub fn read_proposals(text: &str, blob: &[u8]) -> Result<Vec<ProposalRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: String| Error::MalformedLine { line: i + 1, reason };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 6 {
            return Err(bad(format!("expected 6 fields, found {}", f.len())));
        }
        let int = |k: usize| f[k].parse::<usize>().map_err(|e| bad(format!("field {k}: {e}")));
        let num = |k: usize| f[k].parse::<f64>().map_err(|e| bad(format!("field {k}: {e}")));
        let (n, off) = (int(4)?, int(5)?);
        let end = off + n * RECORD_BYTES;
        if end > blob.len() {
            return Err(bad(format!("points {off}..{end} exceed the {}-byte sidecar", blob.len())));
        }
        let read = read_point_cloud(&blob[off..end])?;
        out.push(ProposalRecord {
            frame_index: int(0)?,
            cluster_id: int(1)?,
            velocity: [num(2)?, num(3)?],
            points: read.cloud,
        });
    }
    Ok(out)
}
