//! The network itself: configuration, parameter initialization, the forward
//! and backward chain, the Adam optimizer, and the epoch/mini-batch training
//! loop.
//!
//! Architecture: `Conv(base_filters) -> ReLU -> MaxPool`, then `extra_layers`
//! repetitions of `Conv(extra_filters) -> ReLU -> MaxPool`, then
//! `Flatten -> Dense(dense_hidden) -> ReLU -> Dropout -> Dense(1) -> Sigmoid`.
//! All kernels are 3x3, stride 1, valid padding.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{augment, make_batches, AugmentPlan, DatasetView, Label};
use crate::error::{Error, Result};
use crate::layers::{
    conv2d_backward, conv2d_forward, dense_backward, dense_forward, dropout_backward,
    dropout_forward, flatten_backward, flatten_forward, maxpool2_backward, maxpool2_forward,
    relu_backward, relu_forward, sigmoid_backward, sigmoid_forward, ConvCache, ConvParams,
    DenseCache, DenseParams, DropoutCache, DropoutMode, FlattenCache, MaxPoolCache, ReluCache,
    SigmoidCache,
};
use crate::rng;
use crate::tensor::Tensor;

/// Convolution kernel edge length used throughout the architecture.
pub const KERNEL_SIZE: usize = 3;

// ─── Configuration ─────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_height: usize,
    pub input_width: usize,
    pub input_channels: usize,
    /// Number of Conv(extra_filters)->ReLU->MaxPool blocks appended after the
    /// initial block; the swept hyperparameter.
    pub extra_layers: usize,
    pub base_filters: usize,
    pub extra_filters: usize,
    pub dropout_rate: f64,
    pub dense_hidden: usize,
    pub output_units: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            input_height: 150,
            input_width: 150,
            input_channels: 1,
            extra_layers: 2,
            base_filters: 32,
            extra_filters: 64,
            dropout_rate: 0.5,
            dense_hidden: 64,
            output_units: 1,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidDropoutRate {
                rate: self.dropout_rate,
            });
        }
        if self.output_units != 1 {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "output_units must be 1 for the sigmoid head, got {}",
                    self.output_units
                ),
            });
        }
        let fields = [
            ("input_height", self.input_height),
            ("input_width", self.input_width),
            ("input_channels", self.input_channels),
            ("base_filters", self.base_filters),
            ("extra_filters", self.extra_filters),
            ("dense_hidden", self.dense_hidden),
        ];
        for (name, value) in fields {
            if value == 0 {
                return Err(Error::InvalidConfig {
                    reason: format!("{name} must be positive"),
                });
            }
        }
        Ok(())
    }

    /// The `[channels, height, width]` shape after each conv block (post-pool),
    /// starting with the input shape. Errors if any stage collapses below the
    /// kernel size (conv) or below 2 (pool).
    pub fn stage_shapes(&self) -> Result<Vec<[usize; 3]>> {
        let mut shapes = Vec::with_capacity(self.extra_layers + 2);
        let mut h = self.input_height;
        let mut w = self.input_width;
        shapes.push([self.input_channels, h, w]);
        for block in 0..=self.extra_layers {
            let stage = if block == 0 {
                format!("conv block 1 (base, {} filters)", self.base_filters)
            } else {
                format!("conv block {} (extra, {} filters)", block + 1, self.extra_filters)
            };
            if h < KERNEL_SIZE || w < KERNEL_SIZE {
                return Err(Error::SpatialCollapse {
                    stage,
                    height: h,
                    width: w,
                });
            }
            h -= KERNEL_SIZE - 1;
            w -= KERNEL_SIZE - 1;
            if h < 2 || w < 2 {
                return Err(Error::SpatialCollapse {
                    stage: format!("{stage} max pool"),
                    height: h,
                    width: w,
                });
            }
            h /= 2;
            w /= 2;
            let channels = if block == 0 {
                self.base_filters
            } else {
                self.extra_filters
            };
            shapes.push([channels, h, w]);
        }
        Ok(shapes)
    }

    /// Flattened feature count entering the dense head.
    pub fn flat_features(&self) -> Result<usize> {
        let last = *self.stage_shapes()?.last().expect("at least one stage");
        Ok(last[0] * last[1] * last[2])
    }
}

// ─── Model ─────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    conv_blocks: Vec<ConvParams>,
    hidden: DenseParams,
    output: DenseParams,
}

impl Model {
    /// Builds the layer chain with He-uniform weights and zero biases drawn
    /// from `rng` in a fixed parameter order; deterministic given the seed.
    pub fn build<R: Rng>(config: &ModelConfig, rng: &mut R) -> Result<Model> {
        config.validate()?;
        let shapes = config.stage_shapes()?;
        let mut conv_blocks = Vec::with_capacity(config.extra_layers + 1);
        for (block, stage) in shapes.iter().take(config.extra_layers + 1).enumerate() {
            let in_channels = stage[0];
            let out_channels = if block == 0 {
                config.base_filters
            } else {
                config.extra_filters
            };
            conv_blocks.push(ConvParams::he_uniform(
                out_channels,
                in_channels,
                KERNEL_SIZE,
                rng,
            ));
        }
        let flat = config.flat_features()?;
        let hidden = DenseParams::he_uniform(flat, config.dense_hidden, rng);
        let output = DenseParams::he_uniform(config.dense_hidden, config.output_units, rng);
        Ok(Model {
            config: *config,
            conv_blocks,
            hidden,
            output,
        })
    }

    /// Reassembles a model from its configuration and parameter tensors in
    /// layer order (as produced by [`Model::params`]); used by checkpoints.
    pub fn from_parts(config: ModelConfig, tensors: Vec<Tensor>) -> Result<Model> {
        let mut rng = rng::seeded(0, rng::stream::WEIGHT_INIT);
        let mut model = Model::build(&config, &mut rng)?;
        {
            let params = model.params_mut();
            if params.len() != tensors.len() {
                return Err(Error::LengthMismatch {
                    probabilities: params.len(),
                    labels: tensors.len(),
                });
            }
            for (slot, tensor) in params.into_iter().zip(tensors) {
                if slot.shape() != tensor.shape() {
                    return Err(Error::ShapeMismatch {
                        left: slot.shape().to_vec(),
                        right: tensor.shape().to_vec(),
                    });
                }
                *slot = tensor;
            }
        }
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Parameter tensors in layer order: each block's kernels then bias,
    /// then hidden weights/bias, then output weights/bias.
    pub fn params(&self) -> Vec<&Tensor> {
        let mut out = Vec::with_capacity(self.conv_blocks.len() * 2 + 4);
        for block in &self.conv_blocks {
            out.push(&block.kernels);
            out.push(&block.bias);
        }
        out.push(&self.hidden.weights);
        out.push(&self.hidden.bias);
        out.push(&self.output.weights);
        out.push(&self.output.bias);
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::with_capacity(self.conv_blocks.len() * 2 + 4);
        for block in &mut self.conv_blocks {
            out.push(&mut block.kernels);
            out.push(&mut block.bias);
        }
        out.push(&mut self.hidden.weights);
        out.push(&mut self.hidden.bias);
        out.push(&mut self.output.weights);
        out.push(&mut self.output.bias);
        out
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|t| t.len()).sum()
    }

    fn check_input(&self, image: &Tensor) -> Result<()> {
        let expected = [
            self.config.input_channels,
            self.config.input_height,
            self.config.input_width,
        ];
        if image.shape() != expected {
            return Err(Error::ShapeMismatch {
                left: expected.to_vec(),
                right: image.shape().to_vec(),
            });
        }
        Ok(())
    }

    /// Training-mode forward pass (dropout active); returns the probability
    /// and the caches the backward pass consumes.
    pub fn forward_train<R: Rng>(&self, image: &Tensor, rng: &mut R) -> Result<(f64, ForwardTrace)> {
        self.check_input(image)?;
        self.forward(image, DropoutMode::Train, rng)
    }

    /// Inference-mode probability for one image (dropout off).
    pub fn predict_proba(&self, image: &Tensor) -> Result<f64> {
        self.check_input(image)?;
        // Infer mode never consumes randomness.
        let mut rng = rng::seeded(0, rng::stream::DROPOUT);
        let (p, _) = self.forward(image, DropoutMode::Infer, &mut rng)?;
        Ok(p)
    }

    fn forward<R: Rng>(
        &self,
        image: &Tensor,
        mode: DropoutMode,
        rng: &mut R,
    ) -> Result<(f64, ForwardTrace)> {
        let mut conv = Vec::with_capacity(self.conv_blocks.len());
        let mut current = image.clone();
        for block in &self.conv_blocks {
            let (z, conv_cache) = conv2d_forward(&current, block)?;
            let (a, relu_cache) = relu_forward(&z);
            let (pooled, pool_cache) = maxpool2_forward(&a)?;
            conv.push((conv_cache, relu_cache, pool_cache));
            current = pooled;
        }
        let (flat, flatten) = flatten_forward(&current)?;
        let (hz, hidden_cache) = dense_forward(&flat, &self.hidden)?;
        let (ha, hidden_relu) = relu_forward(&hz);
        let (dropped, dropout) = dropout_forward(&ha, self.config.dropout_rate, mode, rng)?;
        let (logit, output_cache) = dense_forward(&dropped, &self.output)?;
        let (p, sigmoid) = sigmoid_forward(&logit)?;
        Ok((
            p,
            ForwardTrace {
                conv,
                flatten,
                hidden: hidden_cache,
                hidden_relu,
                dropout,
                output: output_cache,
                sigmoid,
            },
        ))
    }

    /// Backpropagates `dloss_dp` through the trace, returning parameter
    /// gradients aligned with [`Model::params`].
    pub fn backward(&self, trace: &ForwardTrace, dloss_dp: f64) -> Result<Gradients> {
        let dlogit = sigmoid_backward(&trace.sigmoid, dloss_dp);
        let grad_logit = Tensor::new(&[1], alloc::vec![dlogit])?;
        let (grad_dropped, output_grads) = dense_backward(&self.output, &trace.output, &grad_logit)?;
        let grad_ha = dropout_backward(&trace.dropout, &grad_dropped)?;
        let grad_hz = relu_backward(&trace.hidden_relu, &grad_ha)?;
        let (grad_flat, hidden_grads) = dense_backward(&self.hidden, &trace.hidden, &grad_hz)?;
        let mut grad = flatten_backward(&trace.flatten, &grad_flat)?;
        let mut conv_grads = Vec::with_capacity(self.conv_blocks.len());
        for (block, (conv_cache, relu_cache, pool_cache)) in
            self.conv_blocks.iter().zip(trace.conv.iter()).rev()
        {
            let grad_a = maxpool2_backward(pool_cache, &grad)?;
            let grad_z = relu_backward(relu_cache, &grad_a)?;
            let (grad_in, grads) = conv2d_backward(block, conv_cache, &grad_z)?;
            conv_grads.push(grads);
            grad = grad_in;
        }
        conv_grads.reverse();

        let mut tensors = Vec::with_capacity(self.conv_blocks.len() * 2 + 4);
        for g in conv_grads {
            tensors.push(g.kernels);
            tensors.push(g.bias);
        }
        tensors.push(hidden_grads.weights);
        tensors.push(hidden_grads.bias);
        tensors.push(output_grads.weights);
        tensors.push(output_grads.bias);
        Ok(Gradients { tensors })
    }
}

/// Per-layer caches from one training-mode forward pass.
pub struct ForwardTrace {
    conv: Vec<(ConvCache, ReluCache, MaxPoolCache)>,
    flatten: FlattenCache,
    hidden: DenseCache,
    hidden_relu: ReluCache,
    dropout: DropoutCache,
    output: DenseCache,
    sigmoid: SigmoidCache,
}

/// Parameter gradients aligned with [`Model::params`].
pub struct Gradients {
    pub tensors: Vec<Tensor>,
}

impl Gradients {
    pub fn zeros_like(model: &Model) -> Gradients {
        Gradients {
            tensors: model
                .params()
                .iter()
                .map(|p| Tensor::zeros(p.shape()))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) -> Result<()> {
        if self.tensors.len() != other.tensors.len() {
            return Err(Error::LengthMismatch {
                probabilities: self.tensors.len(),
                labels: other.tensors.len(),
            });
        }
        for (a, b) in self.tensors.iter_mut().zip(other.tensors.iter()) {
            *a = a.add(b)?;
        }
        Ok(())
    }

    pub fn scale_assign(&mut self, factor: f64) {
        for t in &mut self.tensors {
            for v in t.data_mut() {
                *v *= factor;
            }
        }
    }
}

// ─── Loss and classification ───────────────────────────────────────────────

/// Binary cross-entropy `-(y ln p + (1-y) ln(1-p))` and its gradient in `p`.
/// `p` must already be clamped away from 0 and 1 (the sigmoid head does this).
pub fn bce_loss(prediction: f64, label: Label) -> (f64, f64) {
    let y = label.target();
    let loss = -(y * libm::log(prediction) + (1.0 - y) * libm::log(1.0 - prediction));
    let grad = -y / prediction + (1.0 - y) / (1.0 - prediction);
    (loss, grad)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagnosis {
    Positive,
    Negative,
}

/// Positive iff `probability >= threshold`.
pub fn classify(probability: f64, threshold: f64) -> Diagnosis {
    if probability >= threshold {
        Diagnosis::Positive
    } else {
        Diagnosis::Negative
    }
}

// ─── Optimizer ─────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidTrainConfig {
                reason: String::from("epochs must be >= 1"),
            });
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidTrainConfig {
                reason: String::from("batch_size must be >= 1"),
            });
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidTrainConfig {
                reason: format!("learning_rate {} must be > 0", self.learning_rate),
            });
        }
        Ok(())
    }
}

/// Adam first/second moments, one slot per parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamState {
    moment: Vec<Tensor>,
    velocity: Vec<Tensor>,
    beta1_pow: f64,
    beta2_pow: f64,
    step: u64,
}

impl AdamState {
    pub fn new(model: &Model) -> AdamState {
        let zeros: Vec<Tensor> = model
            .params()
            .iter()
            .map(|p| Tensor::zeros(p.shape()))
            .collect();
        AdamState {
            moment: zeros.clone(),
            velocity: zeros,
            beta1_pow: 1.0,
            beta2_pow: 1.0,
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One Adam update with bias correction across all parameter tensors.
pub fn optimizer_step(
    params: &mut [&mut Tensor],
    grads: &[Tensor],
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.moment.len() {
        return Err(Error::LengthMismatch {
            probabilities: params.len(),
            labels: grads.len(),
        });
    }
    for (p, g) in params.iter().zip(grads.iter()) {
        if p.shape() != g.shape() {
            return Err(Error::ShapeMismatch {
                left: p.shape().to_vec(),
                right: g.shape().to_vec(),
            });
        }
    }
    state.step += 1;
    state.beta1_pow *= config.beta1;
    state.beta2_pow *= config.beta2;
    let correction1 = 1.0 - state.beta1_pow;
    let correction2 = 1.0 - state.beta2_pow;

    for ((param, grad), (m, v)) in params
        .iter_mut()
        .zip(grads.iter())
        .zip(state.moment.iter_mut().zip(state.velocity.iter_mut()))
    {
        let pd = param.data_mut();
        let gd = grad.data();
        let md = m.data_mut();
        let vd = v.data_mut();
        for i in 0..pd.len() {
            md[i] = config.beta1 * md[i] + (1.0 - config.beta1) * gd[i];
            vd[i] = config.beta2 * vd[i] + (1.0 - config.beta2) * gd[i] * gd[i];
            let m_hat = md[i] / correction1;
            let v_hat = vd[i] / correction2;
            pd[i] -= config.learning_rate * m_hat / (libm::sqrt(v_hat) + config.epsilon);
        }
    }
    Ok(())
}

// ─── Training loop ─────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
}

/// One record per completed epoch, evaluated at threshold 0.5 with the model
/// frozen (dropout in infer mode).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub records: Vec<EpochRecord>,
}

/// Mean inference-mode loss and accuracy (threshold 0.5) over a view.
pub fn evaluate(model: &Model, view: DatasetView<'_>) -> Result<(f64, f64)> {
    if view.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut loss_sum = 0.0;
    let mut correct = 0usize;
    for (image, label) in view.iter() {
        let p = model.predict_proba(image)?;
        let (loss, _) = bce_loss(p, label);
        loss_sum += loss;
        let predicted_positive = classify(p, 0.5) == Diagnosis::Positive;
        if predicted_positive == label.is_positive() {
            correct += 1;
        }
    }
    let n = view.len() as f64;
    Ok((loss_sum / n, correct as f64 / n))
}

/// Trains in place. See [`train_with`] for the per-epoch callback variant.
pub fn train(
    model: &mut Model,
    train_set: DatasetView<'_>,
    val_set: DatasetView<'_>,
    config: &TrainConfig,
    augment_plan: Option<&AugmentPlan>,
) -> Result<TrainingHistory> {
    train_with(model, train_set, val_set, config, augment_plan, |_, _| {})
}

/// Per epoch: shuffle the (possibly augmented) training stream with the epoch
/// stream of the seed, process mini-batches (forward, loss, backward, Adam
/// step on the batch-averaged gradient), then evaluate the frozen model on
/// both sets and append a history record. Bitwise deterministic given
/// `(seed, data)`.
pub fn train_with(
    model: &mut Model,
    train_set: DatasetView<'_>,
    val_set: DatasetView<'_>,
    config: &TrainConfig,
    augment_plan: Option<&AugmentPlan>,
    mut on_epoch: impl FnMut(usize, &EpochRecord),
) -> Result<TrainingHistory> {
    config.validate()?;
    if let Some(plan) = augment_plan {
        plan.validate()?;
    }
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for (image, _) in train_set.iter().chain(val_set.iter()) {
        model.check_input(image)?;
    }

    let copies = augment_plan.map_or(0, |p| p.copies);
    let mut dropout_rng = rng::seeded(config.seed, rng::stream::DROPOUT);
    let mut augment_rng = rng::seeded(config.seed, rng::stream::AUGMENT);
    let mut adam = AdamState::new(model);
    let mut history = TrainingHistory::default();

    for epoch in 1..=config.epochs {
        let items: Vec<usize> = if copies == 0 {
            train_set.indices().to_vec()
        } else {
            let mut expanded = Vec::with_capacity(train_set.len() * copies);
            for _ in 0..copies {
                expanded.extend_from_slice(train_set.indices());
            }
            expanded
        };
        let batches = make_batches(&items, config.batch_size, epoch, config.seed);
        for (batch_index, batch) in batches.iter().enumerate() {
            let mut grads = Gradients::zeros_like(model);
            for &sample_index in batch {
                let (image, label) = train_set.sample(sample_index);
                let augmented;
                let input = match augment_plan {
                    Some(plan) if copies > 0 => {
                        augmented = augment(image, plan, &mut augment_rng)?;
                        &augmented
                    }
                    _ => image,
                };
                let (p, trace) = model.forward_train(input, &mut dropout_rng)?;
                let (loss, dloss_dp) = bce_loss(p, label);
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss {
                        epoch,
                        batch: batch_index + 1,
                    });
                }
                let sample_grads = model.backward(&trace, dloss_dp)?;
                grads.add_assign(&sample_grads)?;
            }
            grads.scale_assign(1.0 / batch.len() as f64);
            let mut params = model.params_mut();
            optimizer_step(&mut params, &grads.tensors, &mut adam, config)?;
        }

        let (train_loss, train_acc) = evaluate(model, train_set)?;
        let (val_loss, val_acc) = evaluate(model, val_set)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, batch: 0 });
        }
        let record = EpochRecord {
            train_loss,
            train_acc,
            val_loss,
            val_acc,
        };
        on_epoch(epoch, &record);
        history.records.push(record);
    }
    Ok(history)
}
