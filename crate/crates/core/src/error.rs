//! Error type shared by every module in the crate.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("shape expects {expected} values but {actual} were supplied")]
    ShapeDataMismatch { expected: usize, actual: usize },

    #[error("invalid tensor shape {shape:?}: rank must be 1..=4 with positive dimensions")]
    InvalidShape { shape: Vec<usize> },

    #[error("expected a rank-{expected} tensor, got shape {shape:?}")]
    WrongRank { expected: usize, shape: Vec<usize> },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("input has {input} channels but kernels expect {kernels}")]
    ChannelMismatch { input: usize, kernels: usize },

    #[error("image {input_height}x{input_width} is smaller than the {kernel_height}x{kernel_width} kernel")]
    KernelExceedsInput {
        input_height: usize,
        input_width: usize,
        kernel_height: usize,
        kernel_width: usize,
    },

    #[error("cannot max-pool a {height}x{width} map: both spatial dimensions must be >= 2")]
    PoolInputTooSmall { height: usize, width: usize },

    #[error("dropout rate {rate} is outside [0, 1)")]
    InvalidDropoutRate { rate: f64 },

    #[error("{stage} would produce a {height}x{width} map; every stage needs spatial size >= 1")]
    SpatialCollapse {
        stage: String,
        height: usize,
        width: usize,
    },

    #[error("invalid model configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("invalid training configuration: {reason}")]
    InvalidTrainConfig { reason: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("class {class} has no entries")]
    EmptyClass { class: String },

    #[error("duplicate manifest path: {path}")]
    DuplicatePath { path: String },

    #[error("split ratio {ratio} is outside (0, 1)")]
    InvalidRatio { ratio: f64 },

    #[error("invalid augmentation plan: {reason}")]
    InvalidAugmentPlan { reason: String },

    #[error("got {probabilities} probabilities but {labels} labels")]
    LengthMismatch { probabilities: usize, labels: usize },

    #[error("no samples to evaluate")]
    EmptyInput,

    #[error("threshold {value} is outside [0, 1]")]
    InvalidThreshold { value: f64 },

    #[error("target sensitivity {value} is outside (0, 1]")]
    InvalidTarget { value: f64 },

    #[error("no positive labels in the evaluation set")]
    NoPositiveLabels,

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("history has {len} epochs; at least 4 are needed to judge overfitting")]
    HistoryTooShort { len: usize },

    #[error("invalid sweep grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("trial (extra_layers={extra_layers}, epochs={epochs}, seed={seed}) failed: {source}")]
    Trial {
        extra_layers: usize,
        epochs: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}
