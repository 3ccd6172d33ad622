use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use emd_motion::emd::{field_from_csv, field_to_ppm};
use emd_motion::eval::parse_detections;
use emd_motion::pipeline::{
    evaluate, load_input, load_labels, parse_frame_range, run_sequence, standard_suite,
    write_detect_outputs, write_eval_outputs, write_synthetic, PipelineConfig, SUITE_SEED,
};
use emd_motion::scene_io::SceneSpec;
use emd_motion::Error;

#[derive(Parser)]
#[command(name = "emd-motion", version, about = "Moving-object detection on Lidar sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sequence from a scene spec, or the standard suite.
    Synth {
        /// Scene spec (TOML). Not needed with --suite.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Write the standard synthetic suite, one directory per scene.
        #[arg(long)]
        suite: bool,
        /// Overrides the spec's seed (or the suite seed).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Detect moving objects in a sequence.
    Detect {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Native sequence directory; overrides the config's input.
        #[arg(long)]
        sequence: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// `a..b`, `a..` or `a`.
        #[arg(long)]
        frames: Option<String>,
        /// Full-disc matching at every occupied cell.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        fusion_k: Option<usize>,
    },
    /// Score detections against labels.
    Eval {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Native sequence directory whose labels to use; overrides the
        /// config's input.
        #[arg(long)]
        sequence: Option<PathBuf>,
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render exported motion-field CSVs as PPM flow images.
    Flow {
        /// A field CSV or a directory of them.
        #[arg(long)]
        fields: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Magnitude shown at full saturation, cells per frame.
        #[arg(long, default_value_t = 10.0)]
        max_magnitude: f64,
    },
}

/// Usage or configuration error.
const EXIT_CONFIG: u8 = 1;
/// Unreadable or invalid data, or frames that failed.
const EXIT_DATA: u8 = 2;
/// Metrics below the configured minimums.
const EXIT_THRESHOLD: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_DATA,
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, Error> {
    match path {
        Some(p) => PipelineConfig::load(p).map_err(|e| match e {
            Error::Io { path, source } => Error::Config(format!("cannot read {}: {source}", path.display())),
            other => other,
        }),
        None => Ok(PipelineConfig::default()),
    }
}

fn missing_paths(paths: &[&Path]) -> Result<(), Error> {
    let missing: Vec<String> = paths
        .iter()
        .filter(|p| !p.exists())
        .map(|p| p.display().to_string())
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(format!("missing input: {}", missing.join(", "))))
    }
}

fn input_paths(cfg: &PipelineConfig) -> Vec<&Path> {
    let mut v: Vec<&Path> = Vec::new();
    if let Some(s) = &cfg.input.sequence {
        v.push(s);
    }
    if let Some(k) = &cfg.input.kitti {
        v.push(&k.velodyne);
        v.push(&k.oxts);
        v.extend(k.labels.as_deref());
        v.extend(k.calib.as_deref());
    }
    v
}

fn synth(config: Option<PathBuf>, out: PathBuf, suite: bool, seed: Option<u64>) -> Result<u8, Error> {
    let extent = PipelineConfig::default().bev;
    if suite {
        for scene in standard_suite(seed.unwrap_or(SUITE_SEED)) {
            let dir = out.join(&scene.name);
            let syn = write_synthetic(&dir, &scene.spec, &extent)?;
            log::info!("{}: {} frames", dir.display(), syn.sequence.len());
        }
        return Ok(0);
    }
    let path = config.ok_or_else(|| Error::Config("synth needs --config <scene.toml> or --suite".into()))?;
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    let mut spec = SceneSpec::from_toml(&text)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    let syn = write_synthetic(&out, &spec, &extent)?;
    if syn.truncated > 0 {
        log::warn!("{} object occurrences fell outside the grid and were skipped", syn.truncated);
    }
    Ok(0)
}

fn detect(
    config: Option<PathBuf>,
    sequence: Option<PathBuf>,
    out: Option<PathBuf>,
    frames: Option<String>,
    exhaustive: bool,
    fusion_k: Option<usize>,
) -> Result<u8, Error> {
    let mut cfg = load_config(config.as_deref())?;
    if let Some(s) = sequence {
        cfg.input.sequence = Some(s);
        cfg.input.kitti = None;
    }
    if let Some(o) = out {
        cfg.output = o;
    }
    cfg.runtime.exhaustive |= exhaustive;
    if let Some(k) = fusion_k {
        cfg.fusion.num_frames = k;
    }
    cfg.validate()?;
    if cfg.output.as_os_str().is_empty() {
        return Err(Error::Config("no output directory: set `output` or pass --out".into()));
    }
    missing_paths(&input_paths(&cfg))?;
    if cfg.runtime.threads > 0 {
        // Fails only if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.runtime.threads).build_global();
    }
    let input = load_input(&cfg.input)?;
    if input.rejected_points > 0 {
        log::warn!("{} non-finite points rejected while reading scans", input.rejected_points);
    }
    if input.sequence.is_empty() {
        return Err(Error::Validation("input sequence has no frames".into()));
    }
    let range = frames
        .map(|f| parse_frame_range(&f, input.sequence.len() - 1))
        .transpose()?;
    let run = run_sequence(&input.sequence, &cfg, range)?;
    write_detect_outputs(&cfg.output, &run, &cfg, input.seed)?;
    println!(
        "{} detections over frames {}..{} written to {}",
        run.detections().len(),
        run.frames.start(),
        run.frames.end(),
        cfg.output.display()
    );
    if run.failures.is_empty() {
        Ok(0)
    } else {
        eprintln!("{} frame(s) failed:", run.failures.len());
        for (f, e) in &run.failures {
            eprintln!("  frame {f}: {e}");
        }
        Ok(EXIT_DATA)
    }
}

fn eval(config: Option<PathBuf>, sequence: Option<PathBuf>, detections: PathBuf, out: Option<PathBuf>) -> Result<u8, Error> {
    let mut cfg = load_config(config.as_deref())?;
    if let Some(s) = sequence {
        cfg.input.sequence = Some(s);
        cfg.input.kitti = None;
    }
    cfg.validate()?;
    missing_paths(&[&detections])?;
    missing_paths(&input_paths(&cfg))?;
    let text = std::fs::read_to_string(&detections).map_err(|e| Error::Io { path: detections.clone(), source: e })?;
    let dets = parse_detections(&text)?;
    let (labels, calib) = load_labels(&cfg.input)?;
    let result = evaluate(&dets, &labels, &cfg.eval, calib.as_ref())?;
    let out = out.unwrap_or_else(|| cfg.output.clone());
    let table = write_eval_outputs(&out, &result)?;
    print!("{table}");
    for r in &result.reports {
        if r.is_degenerate() {
            log::warn!("{} view: a metric denominator was zero", r.view.as_str());
        }
    }
    let gated = cfg.eval.min_precision.is_some() || cfg.eval.min_recall.is_some();
    if gated && !result.meets(&cfg.eval) {
        eprintln!("metrics below the configured minimums");
        return Ok(EXIT_THRESHOLD);
    }
    Ok(0)
}

fn flow(fields: PathBuf, out: PathBuf, max_magnitude: f64) -> Result<u8, Error> {
    missing_paths(&[&fields])?;
    let inputs: Vec<PathBuf> = if fields.is_dir() {
        let rd = std::fs::read_dir(&fields).map_err(|e| Error::Io { path: fields.clone(), source: e })?;
        let mut v: Vec<PathBuf> = rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        v.sort();
        v
    } else {
        vec![fields]
    };
    std::fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
    for p in &inputs {
        let text = std::fs::read_to_string(p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
        let field = field_from_csv(&text)?;
        let name = p.file_stem().map(PathBuf::from).unwrap_or_else(|| "field".into());
        let target = out.join(name).with_extension("ppm");
        std::fs::write(&target, field_to_ppm(&field, max_magnitude))
            .map_err(|e| Error::Io { path: target.clone(), source: e })?;
    }
    println!("{} flow image(s) written to {}", inputs.len(), out.display());
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Synth { config, out, suite, seed } => synth(config, out, suite, seed),
        Command::Detect { config, sequence, out, frames, exhaustive, fusion_k } => {
            detect(config, sequence, out, frames, exhaustive, fusion_k)
        }
        Command::Eval { config, sequence, detections, out } => eval(config, sequence, detections, out),
        Command::Flow { fields, out, max_magnitude } => flow(fields, out, max_magnitude),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
