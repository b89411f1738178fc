//! All I/O for the pxcnn toolkit: image decoding, checkpoint and CSV/JSON
//! file formats, SVG plotting, the parallel sweep runner, and the command
//! line itself. The numerics live in `pxcnn-core`.

pub mod checkpoint;
pub mod cli;
pub mod commands;
pub mod dataset_io;
pub mod error;
pub mod history_io;
pub mod parallel;
pub mod run_manifest;
pub mod svg_plot;

pub use error::AppError;
