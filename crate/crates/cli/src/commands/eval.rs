use pxcnn_core::data::{split, Label};
use pxcnn_core::metrics::{compute_metrics, confusion};

use crate::checkpoint;
use crate::cli::EvalArgs;
use crate::dataset_io;
use crate::error::AppError;

pub fn run(args: &EvalArgs) -> Result<(), AppError> {
    let model = checkpoint::load_model(&args.model)?;
    let (manifest, warnings) = dataset_io::scan_dataset(&args.data)?;
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }
    let config = model.config();
    let dataset =
        dataset_io::load_dataset(&manifest, config.input_height, config.input_width)?;

    let indices: Vec<usize> = if args.all {
        (0..dataset.len()).collect()
    } else {
        split(&manifest, 0.8, args.seed).map_err(AppError::data)?.test
    };

    let mut probabilities = Vec::with_capacity(indices.len());
    let mut labels: Vec<Label> = Vec::with_capacity(indices.len());
    for &index in &indices {
        probabilities.push(
            model
                .predict_proba(dataset.image(index))
                .map_err(AppError::data)?,
        );
        labels.push(dataset.label(index));
    }
    let cm = confusion(&probabilities, &labels, args.threshold).map_err(AppError::data)?;
    let report = compute_metrics(&cm, args.threshold);
    println!(
        "{}",
        serde_json::to_string(&report).map_err(AppError::data)?
    );
    Ok(())
}
