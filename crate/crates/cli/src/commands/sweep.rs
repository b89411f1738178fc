use std::fs;

use pxcnn_core::data::{split, AugmentPlan};
use pxcnn_core::experiment::{SweepGrid, TrialEnv};
use pxcnn_core::model::{ModelConfig, TrainConfig};

use crate::cli::SweepArgs;
use crate::error::AppError;
use crate::parallel;
use crate::run_manifest::{path_with_suffix, RunManifest};

pub fn run(args: &SweepArgs) -> Result<(), AppError> {
    let source = super::load_source(
        args.data.as_deref(),
        args.synthetic,
        args.synthetic_count,
        args.seed,
    )?;
    let partition = split(&source.manifest, 0.8, args.seed).map_err(AppError::data)?;

    let grid = SweepGrid {
        extra_layers: args.layers.clone(),
        epochs: args.epochs.clone(),
        repeats: args.repeats,
        base_seed: args.seed,
        target_sensitivity: args.target_sensitivity,
    };
    grid.validate().map_err(AppError::data)?;

    let dims = source.dataset.image(0).shape().to_vec();
    let model_template = ModelConfig {
        input_channels: dims[0],
        input_height: dims[1],
        input_width: dims[2],
        ..ModelConfig::default()
    };
    let train_template = TrainConfig {
        batch_size: args.batch,
        learning_rate: args.lr,
        ..TrainConfig::default()
    };
    let augment = (args.augment_copies > 0).then(|| AugmentPlan {
        copies: args.augment_copies,
        ..AugmentPlan::default()
    });
    let env = TrialEnv {
        data: &source.dataset,
        split: &partition,
        model_template,
        train_template,
        augment,
    };

    eprintln!(
        "sweeping {} cells x {} repeats with {} job(s)",
        grid.cells().len(),
        grid.repeats,
        args.jobs.max(1)
    );
    let report = parallel::run_sweep(&grid, &env, args.jobs);

    let json = serde_json::to_string_pretty(&report).map_err(AppError::data)?;
    fs::write(&args.out, json + "\n").map_err(AppError::data)?;

    let config = serde_json::json!({
        "grid": grid,
        "model": model_template,
        "train": train_template,
        "augment": augment,
        "jobs": args.jobs,
        "split_ratio": 0.8,
        "synthetic": args.synthetic.then_some(args.synthetic_count),
    });
    RunManifest::new("sweep", args.seed, source.root.as_deref(), config)
        .finish_and_save(&path_with_suffix(&args.out, ".manifest.json"))?;

    if report.cells.iter().all(|c| c.failed) {
        return Err(AppError::Training(
            "every sweep cell failed; see the report for details".into(),
        ));
    }
    match report.best_cell {
        Some(cell) => println!(
            "best cell: extra_layers={} epochs={}",
            cell.extra_layers, cell.epochs
        ),
        None => println!("no cell met the sensitivity target"),
    }
    Ok(())
}
