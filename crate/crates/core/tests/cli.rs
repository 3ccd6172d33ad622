use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn emd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emd-motion"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SCENE: &str = r#"
seed = 5
frames = 6
jitter_sigma = 0.02
[[static]]
category = "other"
center = [20.0, 9.0]
size = [3.0, 1.0, 8.0]
density = 1000.0
[[mover]]
category = "car"
center = [14.0, -4.0]
size = [1.5, 1.6, 3.9]
velocity = [8.0, 0.0]
density = 1000.0
"#;

fn synth(dir: &TempDir) -> std::path::PathBuf {
    let spec = dir.path().join("scene.toml");
    std::fs::write(&spec, SCENE).unwrap();
    let seq = dir.path().join("seq");
    let out = emd(&["synth", "--config", s(&spec), "--out", s(&seq)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    seq
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn synth_is_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let (sa, sb) = (synth(&a), synth(&b));
    let (fa, fb) = (read_all(&sa), read_all(&sb));
    assert!(fa.iter().any(|(n, _)| n == "labels.txt"));
    assert_eq!(fa, fb);
}

#[test]
fn detect_twice_then_eval() {
    let dir = TempDir::new().unwrap();
    let seq = synth(&dir);
    let (o1, o2) = (dir.path().join("run1"), dir.path().join("run2"));
    for o in [&o1, &o2] {
        let out = emd(&["detect", "--sequence", s(&seq), "--out", s(o)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["detections.txt", "manifest.toml", "proposals.txt", "proposals.bin"] {
        assert_eq!(std::fs::read(o1.join(f)).unwrap(), std::fs::read(o2.join(f)).unwrap(), "{f}");
    }
    let manifest = std::fs::read_to_string(o1.join("manifest.toml")).unwrap();
    assert!(manifest.contains("config_hash") && manifest.contains("energy_evaluations"));

    let ev = dir.path().join("eval");
    let dets = o1.join("detections.txt");
    let out = emd(&["eval", "--sequence", s(&seq), "--detections", s(&dets), "--out", s(&ev)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(ev.join("metrics.csv").exists() && ev.join("distance_bev.csv").exists());

    // No detections against a recall floor fails the gate.
    let cfg = dir.path().join("gate.toml");
    std::fs::write(&cfg, "[eval]\nmin_recall = 0.5\n").unwrap();
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, emd_motion::eval::format_detections(&Default::default())).unwrap();
    let out = emd(&["eval", "--config", s(&cfg), "--sequence", s(&seq), "--detections", s(&empty), "--out", s(&ev)]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn labels_as_detections_score_one() {
    let dir = TempDir::new().unwrap();
    let seq = synth(&dir);
    let labels = std::fs::read_to_string(seq.join("labels.txt")).unwrap();
    let parsed = emd_motion::scene_io::parse_labels(&labels).unwrap();
    let file = emd_motion::eval::DetectionFile {
        frames: None,
        detections: parsed
            .iter()
            .filter(|l| l.is_moving)
            .map(|l| emd_motion::eval::Detection {
                frame_index: l.frame_index,
                category: l.category,
                bbox: l.bbox,
                speed: 0.0,
            })
            .collect(),
    };
    let dets = dir.path().join("dets.txt");
    std::fs::write(&dets, emd_motion::eval::format_detections(&file)).unwrap();
    let ev = dir.path().join("eval");
    let out = emd(&["eval", "--sequence", s(&seq), "--detections", s(&dets), "--out", s(&ev)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(ev.join("metrics.csv")).unwrap();
    let all = csv.lines().find(|l| l.starts_with("bev,all")).expect("overall bev row");
    assert!(all.ends_with(",0,0,1,1,1,0,0"), "{all}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&emd(&["--help"])), 0);
    assert_eq!(code(&emd(&["detect", "--no-such-flag"])), 1);
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&emd(&["detect", "--config", s(&missing), "--out", s(dir.path())])), 1);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[search]\nmax_distanse = 3\n").unwrap();
    assert_eq!(code(&emd(&["detect", "--config", s(&bad), "--out", s(dir.path())])), 1);
    let nowhere = dir.path().join("nowhere");
    let out = emd(&["detect", "--sequence", s(&nowhere), "--out", s(&dir.path().join("o"))]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
}
