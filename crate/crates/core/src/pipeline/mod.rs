//! End-to-end runs: configuration, per-frame detection, scoring and the
//! standard synthetic suite.

mod config;
mod detect;
mod evaluate;
mod output;
mod suite;

pub use config::{
    parse_frame_range, EvalConfig, InputConfig, KittiInput, PipelineConfig, ProposalConfig,
    RuntimeConfig,
};
pub use detect::{run_sequence, FrameResult, PairFields, Pipeline, SequenceRun, StageTimes};
pub use evaluate::{evaluate, evaluate_frames, scored_frames, Evaluation};
pub use output::{
    detection_file, load_input, load_labels, manifest_toml, search_mode, timings_toml,
    write_detect_outputs, write_eval_outputs, write_synthetic, LoadedInput, KITTI_MOVING_SPEED,
};
pub use suite::{
    standard_suite, suite_scene, SuiteScene, SLOW_SPEED, SUITE_FIRST_SCORED, SUITE_FRAMES,
    SUITE_SCENES, SUITE_SEED,
};
