use pxcnn_core::data::{split, AugmentPlan};
use pxcnn_core::model::{train_with, Model, ModelConfig, TrainConfig};
use pxcnn_core::rng;

use crate::checkpoint;
use crate::cli::TrainArgs;
use crate::error::AppError;
use crate::history_io;
use crate::run_manifest::{path_with_suffix, RunManifest};

pub fn run(args: &TrainArgs) -> Result<(), AppError> {
    let source = super::load_source(
        args.data.as_deref(),
        args.synthetic,
        args.synthetic_count,
        args.seed,
    )?;
    let partition = split(&source.manifest, 0.8, args.seed).map_err(AppError::data)?;

    let dims = source.dataset.image(0).shape().to_vec();
    let model_config = ModelConfig {
        input_channels: dims[0],
        input_height: dims[1],
        input_width: dims[2],
        extra_layers: args.extra_layers,
        ..ModelConfig::default()
    };
    let train_config = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch,
        learning_rate: args.lr,
        seed: args.seed,
        ..TrainConfig::default()
    };
    let augment = (args.augment_copies > 0).then(|| AugmentPlan {
        copies: args.augment_copies,
        seed: args.seed,
        ..AugmentPlan::default()
    });

    let mut init_rng = rng::seeded(args.seed, rng::stream::WEIGHT_INIT);
    let mut model = Model::build(&model_config, &mut init_rng).map_err(AppError::training)?;
    eprintln!(
        "training extra_layers={} epochs={} batch={} lr={} seed={} on {} train / {} test samples ({} parameters)",
        args.extra_layers,
        args.epochs,
        args.batch,
        args.lr,
        args.seed,
        partition.train.len(),
        partition.test.len(),
        model.param_count()
    );

    let total = args.epochs;
    let history = train_with(
        &mut model,
        source.dataset.view(&partition.train),
        source.dataset.view(&partition.test),
        &train_config,
        augment.as_ref(),
        |epoch, record| {
            eprintln!(
                "epoch {epoch}/{total} train_loss={:.6} train_acc={:.4} val_loss={:.6} val_acc={:.4}",
                record.train_loss, record.train_acc, record.val_loss, record.val_acc
            );
        },
    )
    .map_err(AppError::training)?;

    checkpoint::save_model(&model, &args.out)?;
    history_io::write_history_csv(&history, &path_with_suffix(&args.out, ".history.csv"))?;

    let config = serde_json::json!({
        "model": model_config,
        "train": train_config,
        "augment": augment,
        "split_ratio": 0.8,
        "synthetic": args.synthetic.then_some(args.synthetic_count),
    });
    RunManifest::new("train", args.seed, source.root.as_deref(), config)
        .finish_and_save(&path_with_suffix(&args.out, ".manifest.json"))?;

    let last = history.records.last().expect("at least one epoch");
    println!(
        "epoch {total}/{total} train_loss={:.6} train_acc={:.4} val_loss={:.6} val_acc={:.4}",
        last.train_loss, last.train_acc, last.val_loss, last.val_acc
    );
    Ok(())
}
