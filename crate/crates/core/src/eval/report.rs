//! Text and CSV renderings of metric reports.

use std::fmt::Write as _;

use crate::eval::{MetricsReport, Ratios};

fn flag(r: &Ratios) -> &'static str {
    match (r.precision_undefined, r.recall_undefined) {
        (true, true) => " (no detections, no moving objects)",
        (true, false) => " (no detections)",
        (false, true) => " (no moving objects)",
        _ => "",
    }
}

/// Human-readable table; views that could not be evaluated are listed as
/// unavailable.
pub fn format_table(reports: &[MetricsReport], unavailable: &[&str]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<6} {:<12} {:>6} {:>6} {:>6} {:>8} {:>8} {:>8}", "view", "class", "TP", "FP", "FN", "PRE", "REC", "F1");
    for r in reports {
        let mut row = |class: &str, c: &crate::eval::Counts, x: &Ratios| {
            let _ = writeln!(
                s,
                "{:<6} {:<12} {:>6} {:>6} {:>6} {:>8.4} {:>8.4} {:>8.4}{}",
                r.view.as_str(),
                class,
                c.true_positives,
                c.false_positives,
                c.false_negatives,
                x.precision,
                x.recall,
                x.f1,
                flag(x)
            );
        };
        row("all", &r.counts, &r.overall);
        for (cat, (c, x)) in &r.per_category {
            row(cat.as_str(), c, x);
        }
    }
    for v in unavailable {
        let _ = writeln!(s, "{v:<6} unavailable (no calibration supplied)");
    }
    if let Some(r) = reports.first() {
        let _ = writeln!(s, "\nrecall by distance ({} view)", r.view.as_str());
        for b in &r.distance {
            let range = match b.upper {
                Some(u) => format!("{}-{} m", b.lower, u),
                None => format!(">{} m", b.lower),
            };
            let rec = b.recall.map_or("-".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(s, "  {range:<12} {rec:>8}  ({}/{})", b.detected, b.ground_truth);
        }
    }
    s
}

/// `view,class,tp,fp,fn,precision,recall,f1,precision_undefined,recall_undefined`
pub fn metrics_csv(reports: &[MetricsReport]) -> String {
    let mut s = String::from("view,class,tp,fp,fn,precision,recall,f1,precision_undefined,recall_undefined\n");
    for r in reports {
        let mut row = |class: &str, c: &crate::eval::Counts, x: &Ratios| {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.view.as_str(),
                class,
                c.true_positives,
                c.false_positives,
                c.false_negatives,
                x.precision,
                x.recall,
                x.f1,
                x.precision_undefined as u8,
                x.recall_undefined as u8
            );
        };
        row("all", &r.counts, &r.overall);
        for (cat, (c, x)) in &r.per_category {
            row(cat.as_str(), c, x);
        }
    }
    s
}

/// Two columns, `distance_upper_m,recall`, for bins holding ground truth.
/// The open last bin is written with an upper bound of `inf`.
pub fn distance_csv(report: &MetricsReport) -> String {
    let mut s = String::from("distance_upper_m,recall\n");
    for b in &report.distance {
        if let Some(r) = b.recall {
            let upper = b.upper.map_or("inf".to_string(), |u| u.to_string());
            let _ = writeln!(s, "{upper},{r}");
        }
    }
    s
}
