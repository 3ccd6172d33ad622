//! Debug exports: binary PGM images and a row-major CSV of the three maps.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::preprocess::BevMaps;

/// Encodes a grid as an 8-bit binary PGM. Pixel `p` maps back to
/// `lo + p * (hi - lo) / 255`; the mapping is recorded in a header comment.
/// Row 0 is written first.
pub fn encode_pgm(grid: &Grid<f64>, label: &str) -> Vec<u8> {
    let (lo, hi) = grid
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!(
        "P5\n# {label}: value = {lo} + pixel * {span} / 255, row-major, row 0 first\n{} {}\n255\n",
        grid.cols(),
        grid.rows()
    )
    .into_bytes();
    out.extend(
        grid.as_slice()
            .iter()
            .map(|&v| (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8),
    );
    out
}

pub fn bev_csv(maps: &BevMaps) -> String {
    let mut s = String::from("row,col,occupancy,height,gaussian\n");
    for (r, c, &occ) in maps.occupancy.indexed_iter() {
        let _ = writeln!(
            s,
            "{r},{c},{occ},{},{}",
            maps.height[(r, c)],
            maps.gaussian[(r, c)]
        );
    }
    s
}

/// Writes `<stem>_occupancy.pgm`, `<stem>_height.pgm`, `<stem>_gaussian.pgm`
/// and `<stem>.csv` into `dir`.
pub fn export_bev(maps: &BevMaps, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files: [(String, Vec<u8>); 4] = [
        (format!("{stem}_occupancy.pgm"), encode_pgm(&maps.occupancy, "occupancy")),
        (format!("{stem}_height.pgm"), encode_pgm(&maps.height, "mean height (m)")),
        (format!("{stem}_gaussian.pgm"), encode_pgm(&maps.gaussian, "gaussian occupancy")),
        (format!("{stem}.csv"), bev_csv(maps).into_bytes()),
    ];
    for (name, bytes) in files {
        let p = dir.join(name);
        std::fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}
