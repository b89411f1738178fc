//! Property tests for the contracts that hold on all inputs.

use proptest::prelude::*;
use pxcnn_core::data::Label;
use pxcnn_core::layers::{maxpool2_forward, relu_forward};
use pxcnn_core::metrics::{compute_metrics, confusion, tune_threshold};
use pxcnn_core::model::{classify, Diagnosis};
use pxcnn_core::Tensor;

fn finite_vec(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, len)
}

fn prob_labels(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<Label>)> {
    prop::collection::vec((0.0..=1.0f64, prop::bool::ANY), 1..max).prop_map(|pairs| {
        pairs
            .into_iter()
            .map(|(p, pos)| (p, if pos { Label::Pneumonia } else { Label::Normal }))
            .unzip()
    })
}

proptest! {
    #[test]
    fn row_major_round_trip(data in finite_vec(1..60), cols in 1..6usize) {
        let rows = data.len().div_ceil(cols);
        let mut padded = data.clone();
        padded.resize(rows * cols, 0.0);
        let t = Tensor::new(&[rows, cols], padded.clone()).unwrap();
        let mut seen = Vec::with_capacity(padded.len());
        for r in 0..rows {
            for c in 0..cols {
                seen.push(t.get(&[r, c]));
            }
        }
        prop_assert_eq!(seen, padded);
    }

    #[test]
    fn matmul_identity_is_exact(data in finite_vec(1..26)) {
        let n = (data.len() as f64).sqrt() as usize;
        prop_assume!(n >= 1);
        let square: Vec<f64> = data.into_iter().take(n * n).collect();
        prop_assume!(square.len() == n * n);
        let a = Tensor::new(&[n, n], square).unwrap();
        let mut eye = Tensor::zeros(&[n, n]);
        for i in 0..n {
            eye.set(&[i, i], 1.0);
        }
        prop_assert_eq!(eye.matmul(&a).unwrap(), a.clone());
        prop_assert_eq!(a.matmul(&eye).unwrap(), a);
    }

    #[test]
    fn elementwise_add_commutes_and_sub_is_add_neg(
        a in finite_vec(1..40),
        b in finite_vec(1..40)
    ) {
        let n = a.len().min(b.len());
        let ta = Tensor::new(&[n], a[..n].to_vec()).unwrap();
        let tb = Tensor::new(&[n], b[..n].to_vec()).unwrap();
        prop_assert_eq!(ta.add(&tb).unwrap(), tb.add(&ta).unwrap());
        prop_assert_eq!(ta.sub(&tb).unwrap(), ta.add(&tb.scale(-1.0)).unwrap());
    }

    #[test]
    fn relu_is_idempotent_and_nonnegative(data in finite_vec(1..40)) {
        let t = Tensor::new(&[data.len()], data).unwrap();
        let (once, _) = relu_forward(&t);
        prop_assert!(once.data().iter().all(|&v| v >= 0.0));
        let (twice, _) = relu_forward(&once);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn maxpool_outputs_are_window_maxima(data in finite_vec(4..64)) {
        let side = (data.len() as f64).sqrt() as usize;
        prop_assume!(side >= 2);
        let square: Vec<f64> = data.into_iter().take(side * side).collect();
        prop_assume!(square.len() == side * side);
        let t = Tensor::new(&[1, side, side], square).unwrap();
        let (out, _) = maxpool2_forward(&t).unwrap();
        for y in 0..side / 2 {
            for x in 0..side / 2 {
                let window = [
                    t.get(&[0, 2 * y, 2 * x]),
                    t.get(&[0, 2 * y, 2 * x + 1]),
                    t.get(&[0, 2 * y + 1, 2 * x]),
                    t.get(&[0, 2 * y + 1, 2 * x + 1]),
                ];
                let max = window.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                prop_assert_eq!(out.get(&[0, y, x]), max);
                prop_assert!(window.iter().all(|&v| out.get(&[0, y, x]) >= v));
            }
        }
    }

    #[test]
    fn classify_is_monotone(p1 in 0.0..=1.0f64, p2 in 0.0..=1.0f64, t in 0.0..=1.0f64) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        if classify(lo, t) == Diagnosis::Positive {
            prop_assert_eq!(classify(hi, t), Diagnosis::Positive);
        }
        // Antitone in the threshold for a fixed probability.
        let (tlo, thi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        if classify(t, tlo) == Diagnosis::Negative {
            prop_assert_eq!(classify(t, thi), Diagnosis::Negative);
        }
    }

    #[test]
    fn metric_identities((probs, labels) in prob_labels(120), t in 0.0..=1.0f64) {
        let cm = confusion(&probs, &labels, t).unwrap();
        let report = compute_metrics(&cm, t);

        // accuracy * N recovers tp + tn (integer identity, up to one rounding).
        let acc = report.accuracy.unwrap();
        let recovered = acc * report.n as f64;
        let expected = (cm.true_positives + cm.true_negatives) as f64;
        prop_assert!((recovered - expected).abs() < 1e-6);
        prop_assert_eq!(recovered.round() as usize, cm.true_positives + cm.true_negatives);

        // f1 is a harmonic mean: bounded by precision and recall.
        if let (Some(p), Some(r), Some(f1)) = (report.precision, report.recall, report.f1) {
            prop_assert!(f1 >= p.min(r) - 1e-12);
            prop_assert!(f1 <= p.max(r) + 1e-12);
        }
        prop_assert_eq!(report.recall, report.sensitivity);
    }

    #[test]
    fn metrics_are_permutation_invariant((probs, labels) in prob_labels(60), t in 0.0..=1.0f64) {
        let forward = compute_metrics(&confusion(&probs, &labels, t).unwrap(), t);
        let rp: Vec<f64> = probs.iter().rev().copied().collect();
        let rl: Vec<Label> = labels.iter().rev().copied().collect();
        let reversed = compute_metrics(&confusion(&rp, &rl, t).unwrap(), t);
        prop_assert_eq!(forward, reversed);
    }

    #[test]
    fn tuned_threshold_is_the_largest_feasible((probs, labels) in prob_labels(80), target in 0.05..=1.0f64) {
        prop_assume!(labels.iter().any(|l| l.is_positive()));
        let (threshold, report) = tune_threshold(&probs, &labels, target).unwrap();
        prop_assert_eq!(report.target_met, Some(true));
        prop_assert!(report.sensitivity.unwrap() >= target);

        let mut candidates: Vec<f64> = probs.clone();
        candidates.push(0.0);
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        let positives = labels.iter().filter(|l| l.is_positive()).count();
        for &c in &candidates {
            if c > threshold {
                let hits = probs
                    .iter()
                    .zip(labels.iter())
                    .filter(|(&p, l)| l.is_positive() && p >= c)
                    .count();
                prop_assert!((hits as f64 / positives as f64) < target);
            }
        }

        // Sensitivity never increases and specificity never decreases in the
        // threshold (step functions over the candidate set).
        let negatives = probs.len() - positives;
        let mut last_sens = f64::INFINITY;
        let mut last_spec = -1.0f64;
        for &c in &candidates {
            let cm = confusion(&probs, &labels, c).unwrap();
            let sens = cm.true_positives as f64 / positives as f64;
            prop_assert!(sens <= last_sens + 1e-15);
            last_sens = sens;
            if negatives > 0 {
                let spec = cm.true_negatives as f64 / negatives as f64;
                prop_assert!(spec >= last_spec - 1e-15);
                last_spec = spec;
            }
        }
    }
}
