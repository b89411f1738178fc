use pxcnn_core::model::{classify, Diagnosis};

use crate::checkpoint;
use crate::cli::PredictArgs;
use crate::dataset_io;
use crate::error::AppError;

pub fn run(args: &PredictArgs) -> Result<(), AppError> {
    let model = checkpoint::load_model(&args.model)?;
    let config = model.config();
    let image = dataset_io::load_image(&args.image, config.input_height, config.input_width)?;
    let probability = model.predict_proba(&image).map_err(AppError::data)?;
    let diagnosis = match classify(probability, args.threshold) {
        Diagnosis::Positive => "POSITIVE",
        Diagnosis::Negative => "NEGATIVE",
    };
    println!("{probability:.6},{diagnosis}");
    Ok(())
}
