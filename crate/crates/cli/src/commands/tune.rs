use pxcnn_core::data::{split, Label};
use pxcnn_core::metrics::tune_threshold;

use crate::checkpoint;
use crate::cli::TuneArgs;
use crate::dataset_io;
use crate::error::AppError;
use crate::run_manifest::{path_with_suffix, RunManifest};

pub fn run(args: &TuneArgs) -> Result<(), AppError> {
    let model = checkpoint::load_model(&args.model)?;
    let (manifest, warnings) = dataset_io::scan_dataset(&args.data)?;
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }
    let config = model.config();
    let dataset =
        dataset_io::load_dataset(&manifest, config.input_height, config.input_width)?;
    let partition = split(&manifest, 0.8, args.seed).map_err(AppError::data)?;

    let mut probabilities = Vec::with_capacity(partition.test.len());
    let mut labels: Vec<Label> = Vec::with_capacity(partition.test.len());
    for &index in &partition.test {
        probabilities.push(
            model
                .predict_proba(dataset.image(index))
                .map_err(AppError::data)?,
        );
        labels.push(dataset.label(index));
    }
    let (threshold, report) =
        tune_threshold(&probabilities, &labels, args.target_sensitivity).map_err(AppError::data)?;
    println!(
        "{}",
        serde_json::to_string(&report).map_err(AppError::data)?
    );

    // Keep the chosen threshold with the model's manifest.
    let manifest_path = path_with_suffix(&args.model, ".manifest.json");
    let mut run_manifest = RunManifest::load(&manifest_path).unwrap_or_else(|_| {
        RunManifest::new(
            "tune",
            args.seed,
            Some(args.data.as_path()),
            serde_json::json!({ "target_sensitivity": args.target_sensitivity }),
        )
    });
    run_manifest.tuned_threshold = Some(threshold);
    run_manifest.finish_and_save(&manifest_path)?;
    Ok(())
}
