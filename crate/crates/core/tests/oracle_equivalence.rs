//! Brute-force reference implementations of conv, max pooling, matmul, and
//! confusion counting, compared bit-for-bit against the library on hundreds
//! of random instances. The oracles only use `Tensor::get`/plain loops and
//! share nothing with the implementations they check.

use pxcnn_core::data::Label;
use pxcnn_core::layers::{conv2d_forward, maxpool2_forward, ConvParams};
use pxcnn_core::metrics::{confusion, ConfusionMatrix};
use pxcnn_core::rng;
use pxcnn_core::Tensor;
use rand::Rng;

fn random_tensor<R: Rng>(shape: &[usize], rng: &mut R) -> Tensor {
    let len = shape.iter().product();
    let data: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
    Tensor::new(shape, data).unwrap()
}

/// Direct evaluation of the convolution sum, `(c, dy, dx)` ascending.
fn conv_oracle(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Tensor {
    let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (f, kh, kw) = (kernels.shape()[0], kernels.shape()[2], kernels.shape()[3]);
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let mut out = Tensor::zeros(&[f, oh, ow]);
    for fi in 0..f {
        for y in 0..oh {
            for x in 0..ow {
                let mut acc = bias.get(&[fi]);
                for ci in 0..c {
                    for dy in 0..kh {
                        for dx in 0..kw {
                            acc += input.get(&[ci, y + dy, x + dx])
                                * kernels.get(&[fi, ci, dy, dx]);
                        }
                    }
                }
                out.set(&[fi, y, x], acc);
            }
        }
    }
    out
}

/// Window-scanning max with first-in-row-major tie breaking.
fn maxpool_oracle(input: &Tensor) -> Tensor {
    let (c, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Tensor::zeros(&[c, oh, ow]);
    for ci in 0..c {
        for y in 0..oh {
            for x in 0..ow {
                let mut best = f64::NEG_INFINITY;
                for dy in 0..2 {
                    for dx in 0..2 {
                        let v = input.get(&[ci, 2 * y + dy, 2 * x + dx]);
                        if v > best {
                            best = v;
                        }
                    }
                }
                out.set(&[ci, y, x], best);
            }
        }
    }
    out
}

/// Naive triple loop, inner index ascending.
fn matmul_oracle(a: &Tensor, b: &Tensor) -> Tensor {
    let (m, k) = (a.shape()[0], a.shape()[1]);
    let n = b.shape()[1];
    let mut out = Tensor::zeros(&[m, n]);
    for i in 0..m {
        for j in 0..n {
            let mut acc = 0.0;
            for t in 0..k {
                acc += a.get(&[i, t]) * b.get(&[t, j]);
            }
            out.set(&[i, j], acc);
        }
    }
    out
}

/// Per-sample recount.
fn confusion_oracle(probs: &[f64], labels: &[Label], threshold: f64) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix {
        true_positives: 0,
        false_negatives: 0,
        true_negatives: 0,
        false_positives: 0,
    };
    for i in 0..probs.len() {
        let positive = probs[i] >= threshold;
        if labels[i] == Label::Pneumonia {
            if positive {
                cm.true_positives += 1;
            } else {
                cm.false_negatives += 1;
            }
        } else if positive {
            cm.false_positives += 1;
        } else {
            cm.true_negatives += 1;
        }
    }
    cm
}

#[test]
fn conv2d_matches_naive_oracle_exactly() {
    let mut rng = rng::seeded(201, 0);
    for _ in 0..200 {
        let c = rng.random_range(1..=3usize);
        let k = rng.random_range(1..=3usize);
        let h = rng.random_range(k..=8usize);
        let w = rng.random_range(k..=8usize);
        let f = rng.random_range(1..=4usize);
        let input = random_tensor(&[c, h, w], &mut rng);
        let kernels = random_tensor(&[f, c, k, k], &mut rng);
        let bias = random_tensor(&[f], &mut rng);
        let params = ConvParams::new(kernels.clone(), bias.clone()).unwrap();
        let (out, _) = conv2d_forward(&input, &params).unwrap();
        let expected = conv_oracle(&input, &kernels, &bias);
        assert_eq!(out, expected);
    }
}

#[test]
fn maxpool_matches_window_scan_oracle_exactly() {
    let mut rng = rng::seeded(202, 0);
    for _ in 0..200 {
        let c = rng.random_range(1..=3usize);
        let h = rng.random_range(2..=9usize);
        let w = rng.random_range(2..=9usize);
        let input = random_tensor(&[c, h, w], &mut rng);
        let (out, _) = maxpool2_forward(&input).unwrap();
        assert_eq!(out, maxpool_oracle(&input));
    }
    // The 1x6x6 instance named in the operation contract.
    let input = random_tensor(&[1, 6, 6], &mut rng);
    let (out, _) = maxpool2_forward(&input).unwrap();
    assert_eq!(out, maxpool_oracle(&input));
}

#[test]
fn matmul_matches_triple_loop_oracle_exactly() {
    let mut rng = rng::seeded(203, 0);
    for _ in 0..200 {
        let m = rng.random_range(1..=6usize);
        let k = rng.random_range(1..=6usize);
        let n = rng.random_range(1..=6usize);
        let a = random_tensor(&[m, k], &mut rng);
        let b = random_tensor(&[k, n], &mut rng);
        assert_eq!(a.matmul(&b).unwrap(), matmul_oracle(&a, &b));
    }
    // The 3x4 by 4x2 instance named in the operation contract.
    let a = random_tensor(&[3, 4], &mut rng);
    let b = random_tensor(&[4, 2], &mut rng);
    assert_eq!(a.matmul(&b).unwrap(), matmul_oracle(&a, &b));
}

#[test]
fn confusion_matches_recount_oracle_exactly() {
    let mut rng = rng::seeded(204, 0);
    for _ in 0..200 {
        let n = rng.random_range(1..=200usize);
        let probs: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
        let labels: Vec<Label> = (0..n)
            .map(|_| {
                if rng.random::<bool>() {
                    Label::Pneumonia
                } else {
                    Label::Normal
                }
            })
            .collect();
        let threshold: f64 = rng.random_range(0.0..=1.0);
        let cm = confusion(&probs, &labels, threshold).unwrap();
        assert_eq!(cm, confusion_oracle(&probs, &labels, threshold));
    }
}
