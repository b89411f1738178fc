//! One module per subcommand plus the shared data-source plumbing.

mod eval;
mod plot;
mod predict;
mod sweep;
mod train;
mod tune;

use std::path::{Path, PathBuf};

use pxcnn_core::data::{Dataset, DatasetManifest};
use pxcnn_core::synthetic;

use crate::cli::Command;
use crate::dataset_io;
use crate::error::AppError;

pub fn dispatch(command: &Command) -> Result<(), AppError> {
    match command {
        Command::Train(args) => train::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Tune(args) => tune::run(args),
        Command::Predict(args) => predict::run(args),
        Command::Sweep(args) => sweep::run(args),
        Command::Plot(args) => plot::run(args),
    }
}

/// Target edge length for images loaded from disk.
pub const INPUT_SIZE: usize = 150;

pub(crate) struct DataSource {
    pub manifest: DatasetManifest,
    pub dataset: Dataset,
    pub root: Option<PathBuf>,
}

/// Loads either the on-disk dataset (resized to 150x150) or the built-in
/// synthetic one. Scan warnings go to stderr.
pub(crate) fn load_source(
    data: Option<&Path>,
    use_synthetic: bool,
    synthetic_count: usize,
    seed: u64,
) -> Result<DataSource, AppError> {
    if use_synthetic {
        let (manifest, dataset) = synthetic::generate(synthetic_count, synthetic::DEFAULT_SIZE, seed);
        return Ok(DataSource {
            manifest,
            dataset,
            root: None,
        });
    }
    let root = data.expect("clap requires --data unless --synthetic");
    let (manifest, warnings) = dataset_io::scan_dataset(root)?;
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }
    let dataset = dataset_io::load_dataset(&manifest, INPUT_SIZE, INPUT_SIZE)?;
    Ok(DataSource {
        manifest,
        dataset,
        root: Some(root.to_path_buf()),
    })
}
