//! Forward and backward passes for every layer in the network:
//! valid-padding 3x3 convolution, ReLU, 2x2 max pooling, flatten, dense,
//! inverted dropout, and the sigmoid output head.
//!
//! Each forward pass returns the values its backward pass needs as an
//! explicit cache: the raw input for conv/dense, the positive mask for ReLU,
//! the argmax coordinate per window for max pooling, and the scaled keep mask
//! for dropout. A cache pairs with exactly one forward call; backward passes
//! verify the incoming gradient against it.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Sigmoid outputs are clamped to `[EPS, 1 - EPS]` so the log-loss stays finite.
pub const SIGMOID_EPS: f64 = 1e-12;

fn dims3(t: &Tensor) -> Result<(usize, usize, usize)> {
    if t.rank() != 3 {
        return Err(Error::WrongRank {
            expected: 3,
            shape: t.shape().to_vec(),
        });
    }
    Ok((t.shape()[0], t.shape()[1], t.shape()[2]))
}

fn require_shape(expected: &[usize], actual: &Tensor) -> Result<()> {
    if actual.shape() != expected {
        return Err(Error::ShapeMismatch {
            left: expected.to_vec(),
            right: actual.shape().to_vec(),
        });
    }
    Ok(())
}

// ─── Convolution ───────────────────────────────────────────────────────────

/// Kernels `[out_channels, in_channels, kh, kw]` plus one bias per filter.
/// Stride is 1 and padding is "valid" (none).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    pub kernels: Tensor,
    pub bias: Tensor,
}

impl ConvParams {
    pub fn new(kernels: Tensor, bias: Tensor) -> Result<Self> {
        if kernels.rank() != 4 {
            return Err(Error::WrongRank {
                expected: 4,
                shape: kernels.shape().to_vec(),
            });
        }
        require_shape(&[kernels.shape()[0]], &bias)?;
        Ok(Self { kernels, bias })
    }

    /// He-uniform kernels (bound `sqrt(6 / fan_in)`), zero biases.
    pub fn he_uniform<R: Rng>(
        out_channels: usize,
        in_channels: usize,
        kernel: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = (in_channels * kernel * kernel) as f64;
        let bound = libm::sqrt(6.0 / fan_in);
        let n = out_channels * in_channels * kernel * kernel;
        let data: Vec<f64> = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
        Self {
            kernels: Tensor::new(&[out_channels, in_channels, kernel, kernel], data)
                .expect("kernel shape is valid by construction"),
            bias: Tensor::zeros(&[out_channels]),
        }
    }

    pub fn out_channels(&self) -> usize {
        self.kernels.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.kernels.shape()[1]
    }

    pub fn kernel_height(&self) -> usize {
        self.kernels.shape()[2]
    }

    pub fn kernel_width(&self) -> usize {
        self.kernels.shape()[3]
    }
}

#[derive(Debug, Clone)]
pub struct ConvCache {
    input: Tensor,
}

#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub kernels: Tensor,
    pub bias: Tensor,
}

/// Valid-padding stride-1 correlation:
/// `out(f,y,x) = bias(f) + sum over (c,dy,dx) of in(c,y+dy,x+dx) * k(f,c,dy,dx)`,
/// summed with `(c,dy,dx)` ascending.
pub fn conv2d_forward(input: &Tensor, params: &ConvParams) -> Result<(Tensor, ConvCache)> {
    let (c, h, w) = dims3(input)?;
    let (f, kc) = (params.out_channels(), params.in_channels());
    let (kh, kw) = (params.kernel_height(), params.kernel_width());
    if kc != c {
        return Err(Error::ChannelMismatch {
            input: c,
            kernels: kc,
        });
    }
    if h < kh || w < kw {
        return Err(Error::KernelExceedsInput {
            input_height: h,
            input_width: w,
            kernel_height: kh,
            kernel_width: kw,
        });
    }
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let src = input.data();
    let kern = params.kernels.data();
    let bias = params.bias.data();
    let mut out = vec![0.0; f * oh * ow];
    for fi in 0..f {
        for y in 0..oh {
            for x in 0..ow {
                let mut acc = bias[fi];
                for ci in 0..c {
                    for dy in 0..kh {
                        for dx in 0..kw {
                            acc += src[ci * h * w + (y + dy) * w + (x + dx)]
                                * kern[fi * c * kh * kw + ci * kh * kw + dy * kw + dx];
                        }
                    }
                }
                out[fi * oh * ow + y * ow + x] = acc;
            }
        }
    }
    Ok((
        Tensor::new(&[f, oh, ow], out)?,
        ConvCache {
            input: input.clone(),
        },
    ))
}

/// Gradients of a scalar loss w.r.t. the convolution input, kernels, and bias.
pub fn conv2d_backward(
    params: &ConvParams,
    cache: &ConvCache,
    grad_out: &Tensor,
) -> Result<(Tensor, ConvGrads)> {
    let (c, h, w) = dims3(&cache.input)?;
    let f = params.out_channels();
    let (kh, kw) = (params.kernel_height(), params.kernel_width());
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    require_shape(&[f, oh, ow], grad_out)?;

    let src = cache.input.data();
    let kern = params.kernels.data();
    let go = grad_out.data();
    let mut grad_input = vec![0.0; c * h * w];
    let mut grad_kernels = vec![0.0; f * c * kh * kw];
    let mut grad_bias = vec![0.0; f];

    for fi in 0..f {
        let mut gb = 0.0;
        for y in 0..oh {
            for x in 0..ow {
                let g = go[fi * oh * ow + y * ow + x];
                gb += g;
                for ci in 0..c {
                    for dy in 0..kh {
                        for dx in 0..kw {
                            let k_off = fi * c * kh * kw + ci * kh * kw + dy * kw + dx;
                            let in_off = ci * h * w + (y + dy) * w + (x + dx);
                            grad_kernels[k_off] += g * src[in_off];
                            grad_input[in_off] += g * kern[k_off];
                        }
                    }
                }
            }
        }
        grad_bias[fi] = gb;
    }

    Ok((
        Tensor::new(&[c, h, w], grad_input)?,
        ConvGrads {
            kernels: Tensor::new(params.kernels.shape(), grad_kernels)?,
            bias: Tensor::new(&[f], grad_bias)?,
        },
    ))
}

// ─── ReLU ──────────────────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct ReluCache {
    positive: Vec<bool>,
    shape: Vec<usize>,
}

/// `max(0, x)` elementwise; the cache records which inputs were strictly positive.
pub fn relu_forward(input: &Tensor) -> (Tensor, ReluCache) {
    let positive: Vec<bool> = input.data().iter().map(|&v| v > 0.0).collect();
    let out: Vec<f64> = input.data().iter().map(|&v| v.max(0.0)).collect();
    let cache = ReluCache {
        positive,
        shape: input.shape().to_vec(),
    };
    (
        Tensor::new(input.shape(), out).expect("shape preserved"),
        cache,
    )
}

/// Passes gradients through where the forward input was > 0, zero elsewhere.
pub fn relu_backward(cache: &ReluCache, grad_out: &Tensor) -> Result<Tensor> {
    require_shape(&cache.shape, grad_out)?;
    let data: Vec<f64> = grad_out
        .data()
        .iter()
        .zip(cache.positive.iter())
        .map(|(&g, &p)| if p { g } else { 0.0 })
        .collect();
    Tensor::new(&cache.shape, data)
}

// ─── 2x2 max pooling ───────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct MaxPoolCache {
    /// Flat input offset of the max per output element (ties resolve to the
    /// smallest row-major coordinate in the window).
    argmax: Vec<usize>,
    in_shape: [usize; 3],
}

impl MaxPoolCache {
    /// Flat argmax offsets, exposed for inspection in tests.
    pub fn argmax(&self) -> &[usize] {
        &self.argmax
    }
}

/// Max over non-overlapping 2x2 windows; odd trailing rows/columns are dropped.
pub fn maxpool2_forward(input: &Tensor) -> Result<(Tensor, MaxPoolCache)> {
    let (c, h, w) = dims3(input)?;
    if h < 2 || w < 2 {
        return Err(Error::PoolInputTooSmall {
            height: h,
            width: w,
        });
    }
    let (oh, ow) = (h / 2, w / 2);
    let src = input.data();
    let mut out = vec![0.0; c * oh * ow];
    let mut argmax = vec![0usize; c * oh * ow];
    for ci in 0..c {
        for y in 0..oh {
            for x in 0..ow {
                let base = ci * h * w + 2 * y * w + 2 * x;
                let mut best_off = base;
                let mut best = src[base];
                // Row-major scan; strict > keeps the first (smallest) coordinate on ties.
                for (dy, dx) in [(0usize, 1usize), (1, 0), (1, 1)] {
                    let off = base + dy * w + dx;
                    if src[off] > best {
                        best = src[off];
                        best_off = off;
                    }
                }
                let o = ci * oh * ow + y * ow + x;
                out[o] = best;
                argmax[o] = best_off;
            }
        }
    }
    Ok((
        Tensor::new(&[c, oh, ow], out)?,
        MaxPoolCache {
            argmax,
            in_shape: [c, h, w],
        },
    ))
}

/// Routes each output gradient to its recorded argmax position.
pub fn maxpool2_backward(cache: &MaxPoolCache, grad_out: &Tensor) -> Result<Tensor> {
    let [c, h, w] = cache.in_shape;
    require_shape(&[c, h / 2, w / 2], grad_out)?;
    let mut grad_input = vec![0.0; c * h * w];
    for (&off, &g) in cache.argmax.iter().zip(grad_out.data().iter()) {
        grad_input[off] += g;
    }
    Tensor::new(&[c, h, w], grad_input)
}

// ─── Flatten ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone)]
pub struct FlattenCache {
    in_shape: [usize; 3],
}

/// Row-major flattening of a `[C,H,W]` tensor to `[C*H*W]`.
pub fn flatten_forward(input: &Tensor) -> Result<(Tensor, FlattenCache)> {
    let (c, h, w) = dims3(input)?;
    Ok((
        input.reshape(&[c * h * w])?,
        FlattenCache { in_shape: [c, h, w] },
    ))
}

/// Inverse reshape of the forward flattening.
pub fn flatten_backward(cache: &FlattenCache, grad_out: &Tensor) -> Result<Tensor> {
    let [c, h, w] = cache.in_shape;
    require_shape(&[c * h * w], grad_out)?;
    grad_out.reshape(&[c, h, w])
}

// ─── Dense ─────────────────────────────────────────────────────────────────

/// Weights `[in_features, out_features]` plus one bias per output.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl DenseParams {
    pub fn new(weights: Tensor, bias: Tensor) -> Result<Self> {
        if weights.rank() != 2 {
            return Err(Error::WrongRank {
                expected: 2,
                shape: weights.shape().to_vec(),
            });
        }
        require_shape(&[weights.shape()[1]], &bias)?;
        Ok(Self { weights, bias })
    }

    pub fn he_uniform<R: Rng>(in_features: usize, out_features: usize, rng: &mut R) -> Self {
        let bound = libm::sqrt(6.0 / in_features as f64);
        let n = in_features * out_features;
        let data: Vec<f64> = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
        Self {
            weights: Tensor::new(&[in_features, out_features], data)
                .expect("weight shape is valid by construction"),
            bias: Tensor::zeros(&[out_features]),
        }
    }

    pub fn in_features(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn out_features(&self) -> usize {
        self.weights.shape()[1]
    }
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    input: Tensor,
}

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub weights: Tensor,
    pub bias: Tensor,
}

/// `out = input^T * W + b`, summing over inputs in ascending order.
pub fn dense_forward(input: &Tensor, params: &DenseParams) -> Result<(Tensor, DenseCache)> {
    require_shape(&[params.in_features()], input)?;
    let (n_in, n_out) = (params.in_features(), params.out_features());
    let x = input.data();
    let w = params.weights.data();
    let mut out = params.bias.data().to_vec();
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..n_in {
            acc += x[i] * w[i * n_out + j];
        }
        *o += acc;
    }
    Ok((
        Tensor::new(&[n_out], out)?,
        DenseCache {
            input: input.clone(),
        },
    ))
}

/// Gradients w.r.t. the dense input, weights, and bias.
pub fn dense_backward(
    params: &DenseParams,
    cache: &DenseCache,
    grad_out: &Tensor,
) -> Result<(Tensor, DenseGrads)> {
    let (n_in, n_out) = (params.in_features(), params.out_features());
    require_shape(&[n_out], grad_out)?;
    let x = cache.input.data();
    let w = params.weights.data();
    let g = grad_out.data();

    let mut grad_weights = vec![0.0; n_in * n_out];
    let mut grad_input = vec![0.0; n_in];
    for i in 0..n_in {
        let mut acc = 0.0;
        for j in 0..n_out {
            grad_weights[i * n_out + j] = x[i] * g[j];
            acc += w[i * n_out + j] * g[j];
        }
        grad_input[i] = acc;
    }

    Ok((
        Tensor::new(&[n_in], grad_input)?,
        DenseGrads {
            weights: Tensor::new(&[n_in, n_out], grad_weights)?,
            bias: Tensor::new(&[n_out], g.to_vec())?,
        },
    ))
}

// ─── Dropout ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Infer,
}

#[derive(Debug, Clone)]
pub struct DropoutCache {
    keep: Vec<bool>,
    scale: f64,
    shape: Vec<usize>,
}

/// Inverted dropout: in train mode each element is zeroed with probability
/// `rate` and survivors are scaled by `1/(1-rate)`; in infer mode the input
/// passes through unchanged (with an all-keep cache).
pub fn dropout_forward<R: Rng>(
    input: &Tensor,
    rate: f64,
    mode: DropoutMode,
    rng: &mut R,
) -> Result<(Tensor, DropoutCache)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidDropoutRate { rate });
    }
    let shape = input.shape().to_vec();
    match mode {
        DropoutMode::Infer => Ok((
            input.clone(),
            DropoutCache {
                keep: vec![true; input.len()],
                scale: 1.0,
                shape,
            },
        )),
        DropoutMode::Train => {
            let scale = 1.0 / (1.0 - rate);
            let keep: Vec<bool> = (0..input.len())
                .map(|_| rng.random::<f64>() >= rate)
                .collect();
            let data: Vec<f64> = input
                .data()
                .iter()
                .zip(keep.iter())
                .map(|(&v, &k)| if k { v * scale } else { 0.0 })
                .collect();
            Ok((
                Tensor::new(&shape, data)?,
                DropoutCache { keep, scale, shape },
            ))
        }
    }
}

/// Applies the same scaled keep mask to the incoming gradient.
pub fn dropout_backward(cache: &DropoutCache, grad_out: &Tensor) -> Result<Tensor> {
    require_shape(&cache.shape, grad_out)?;
    let data: Vec<f64> = grad_out
        .data()
        .iter()
        .zip(cache.keep.iter())
        .map(|(&g, &k)| if k { g * cache.scale } else { 0.0 })
        .collect();
    Tensor::new(&cache.shape, data)
}

// ─── Sigmoid head ──────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy)]
pub struct SigmoidCache {
    p: f64,
}

/// Numerically stable logistic function, clamped to `[EPS, 1-EPS]`.
pub fn sigmoid(logit: f64) -> f64 {
    let p = if logit >= 0.0 {
        1.0 / (1.0 + libm::exp(-logit))
    } else {
        let e = libm::exp(logit);
        e / (1.0 + e)
    };
    p.clamp(SIGMOID_EPS, 1.0 - SIGMOID_EPS)
}

/// Maps a single-element logit tensor to a probability.
pub fn sigmoid_forward(input: &Tensor) -> Result<(f64, SigmoidCache)> {
    require_shape(&[1], input)?;
    let p = sigmoid(input.data()[0]);
    Ok((p, SigmoidCache { p }))
}

/// `dloss/dlogit = dloss/dp * p * (1 - p)`.
pub fn sigmoid_backward(cache: &SigmoidCache, dloss_dp: f64) -> f64 {
    dloss_dp * cache.p * (1.0 - cache.p)
}
