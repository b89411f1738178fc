//! Argument definitions. `PXCNN_SEED` provides the default seed everywhere a
//! `--seed` flag exists; the flag overrides the environment.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn sensitivity_target(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1]"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pxcnn",
    version,
    about = "Train, evaluate, tune, and sweep a small CNN for binary pneumonia screening on chest x-rays"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model; writes the checkpoint, a history CSV, and a run manifest
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset and print a metrics report as JSON
    Eval(EvalArgs),
    /// Tune the decision threshold to a sensitivity target
    Tune(TuneArgs),
    /// Classify a single image
    Predict(PredictArgs),
    /// Grid sweep over extra layers and epochs with repeated seeded trials
    Sweep(SweepArgs),
    /// Render accuracy curves from a history CSV as a standalone SVG
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset root containing NORMAL/ and PNEUMONIA/ image directories
    #[arg(long, required_unless_present = "synthetic")]
    pub data: Option<PathBuf>,
    /// Conv(64) blocks appended after the initial Conv(32) block
    #[arg(long)]
    pub extra_layers: usize,
    #[arg(long)]
    pub epochs: usize,
    #[arg(long, env = "PXCNN_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Checkpoint path; `<out>.history.csv` and `<out>.manifest.json` land next to it
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Augmented resamples of each training image per epoch (0 trains on raw images)
    #[arg(long, default_value_t = 1)]
    pub augment_copies: usize,
    /// Use the built-in synthetic disc dataset instead of --data
    #[arg(long)]
    pub synthetic: bool,
    /// Image count for --synthetic
    #[arg(long, default_value_t = 250)]
    pub synthetic_count: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    pub threshold: f64,
    /// Evaluate the whole directory instead of the test portion of the split
    #[arg(long)]
    pub all: bool,
    /// Seed that reproduces the train/test split
    #[arg(long, env = "PXCNN_SEED", default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0.9, value_parser = sensitivity_target)]
    pub target_sensitivity: f64,
    /// Seed that reproduces the train/test split
    #[arg(long, env = "PXCNN_SEED", default_value_t = 42)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long, default_value_t = 0.5, value_parser = unit_interval)]
    pub threshold: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Dataset root containing NORMAL/ and PNEUMONIA/ image directories
    #[arg(long, required_unless_present = "synthetic")]
    pub data: Option<PathBuf>,
    /// Extra-layer values to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4])]
    pub layers: Vec<usize>,
    /// Epoch counts to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [5, 10, 20])]
    pub epochs: Vec<usize>,
    /// Seeded trials per grid cell, averaged in the report
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0.9, value_parser = sensitivity_target)]
    pub target_sensitivity: f64,
    /// Report path; `<out>.manifest.json` lands next to it
    #[arg(long)]
    pub out: PathBuf,
    /// Concurrent trial executors
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, env = "PXCNN_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 1)]
    pub augment_copies: usize,
    /// Use the built-in synthetic disc dataset instead of --data
    #[arg(long)]
    pub synthetic: bool,
    /// Image count for --synthetic
    #[arg(long, default_value_t = 250)]
    pub synthetic_count: usize,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// History CSV produced by `pxcnn train`
    #[arg(long)]
    pub history: PathBuf,
    /// SVG output path
    #[arg(long)]
    pub out: PathBuf,
}
