//! Motion-field exports: a sparse CSV that can be read back, and a PPM flow
//! image.

use std::fmt::Write as _;

use crate::emd::MotionField;
use crate::error::{Error, Result};

/// One line per cell that was rough or moving:
/// `row,col,x,y,score,moving`, with `x`/`y` empty where no vector is kept.
/// A leading comment records the grid shape and interval.
pub fn field_to_csv(field: &MotionField) -> String {
    let (rows, cols) = field.shape();
    let mut s = format!(
        "# rows={rows} cols={cols} interval={}\nrow,col,x,y,score,moving\n",
        field.interval
    );
    for (r, c, &m) in field.moving.indexed_iter() {
        if !m && !field.rough[(r, c)] {
            continue;
        }
        let (x, y) = match field.vectors[(r, c)] {
            Some(v) => (v[0].to_string(), v[1].to_string()),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(s, "{r},{c},{x},{y},{},{}", field.score[(r, c)], m as u8);
    }
    s
}

/// Reads [`field_to_csv`] output. Rough-stage details other than the mask are
/// not stored and come back empty.
pub fn field_from_csv(text: &str) -> Result<MotionField> {
    let mut lines = text.lines().enumerate();
    let bad = |line: usize, reason: String| Error::MalformedLine { line: line + 1, reason };
    let (_, head) = lines.next().ok_or_else(|| bad(0, "empty motion field".into()))?;
    let mut dims = [None; 3];
    for tok in head.trim_start_matches('#').split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| bad(0, format!("bad header token {tok:?}")))?;
        let slot = match k {
            "rows" => 0,
            "cols" => 1,
            "interval" => 2,
            _ => return Err(bad(0, format!("unknown header key {k:?}"))),
        };
        dims[slot] = Some(v.parse::<usize>().map_err(|e| bad(0, format!("{k}: {e}")))?);
    }
    let [Some(rows), Some(cols), Some(interval)] = dims else {
        return Err(bad(0, "header needs rows, cols and interval".into()));
    };
    let mut field = MotionField::empty(rows, cols, interval as u32);
    lines.next();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(bad(i, format!("expected 6 fields, found {}", f.len())));
        }
        let idx = |k: usize, n: usize| -> Result<usize> {
            let v: usize = f[k].parse().map_err(|e| bad(i, format!("field {k}: {e}")))?;
            if v >= n {
                return Err(bad(i, format!("index {v} outside the grid")));
            }
            Ok(v)
        };
        let num = |k: usize| -> Result<f64> { f[k].parse().map_err(|e| bad(i, format!("field {k}: {e}"))) };
        let (r, c) = (idx(0, rows)?, idx(1, cols)?);
        field.rough[(r, c)] = true;
        if !f[2].is_empty() {
            field.vectors[(r, c)] = Some([num(2)?, num(3)?]);
        }
        field.score[(r, c)] = num(4)?;
        field.moving[(r, c)] = f[5] == "1";
    }
    Ok(field)
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h6 = (h.rem_euclid(1.0)) * 6.0;
    let i = h6.floor();
    let f = h6 - i;
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    let (r, g, b) = match i as u8 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [r, g, b].map(|x| (x * 255.0).round() as u8)
}

/// Binary PPM, row 0 first. Hue encodes direction, saturation the magnitude
/// relative to `max_magnitude`; cells without a vector are white.
pub fn field_to_ppm(field: &MotionField, max_magnitude: f64) -> Vec<u8> {
    let (rows, cols) = field.shape();
    let mut out = format!("P6\n{cols} {rows}\n255\n").into_bytes();
    out.reserve(rows * cols * 3);
    for v in field.vectors.as_slice() {
        let rgb = match v {
            Some([x, y]) if max_magnitude > 0.0 => {
                let hue = y.atan2(*x) / std::f64::consts::TAU;
                let sat = (x.hypot(*y) / max_magnitude).min(1.0);
                hsv_to_rgb(hue, sat, 1.0)
            }
            _ => [255, 255, 255],
        };
        out.extend_from_slice(&rgb);
    }
    out
}
