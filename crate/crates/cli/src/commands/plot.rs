use std::fs;

use crate::cli::PlotArgs;
use crate::error::AppError;
use crate::history_io;
use crate::run_manifest::{path_with_suffix, RunManifest};
use crate::svg_plot;

pub fn run(args: &PlotArgs) -> Result<(), AppError> {
    let history = history_io::read_history_csv(&args.history)?;
    let svg = svg_plot::render_accuracy_svg(&history);
    fs::write(&args.out, svg).map_err(AppError::data)?;

    let config = serde_json::json!({
        "history": args.history.to_string_lossy(),
        "epochs": history.records.len(),
    });
    RunManifest::new("plot", 0, None, config)
        .finish_and_save(&path_with_suffix(&args.out, ".manifest.json"))?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}
