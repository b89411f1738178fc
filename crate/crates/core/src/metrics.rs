//! Confusion-matrix construction, the derived metric suite (sensitivity,
//! specificity, accuracy, precision, recall, F1), and threshold tuning to a
//! target sensitivity.
//!
//! Metrics with a zero denominator are reported as undefined (`None`), never
//! coerced to 0 or 1, so degenerate evaluation sets cannot silently inflate a
//! report.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    pub false_positives: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_negatives + self.true_negatives + self.false_positives
    }
}

/// All metrics at one threshold. Field order is the serialized key order.
/// `recall` always equals `sensitivity`; both names appear because reports
/// surface both. `target_met` is set only by threshold tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub threshold: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub n: usize,
    pub target_met: Option<bool>,
}

fn count_at(probabilities: &[f64], labels: &[Label], threshold: f64) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix {
        true_positives: 0,
        false_negatives: 0,
        true_negatives: 0,
        false_positives: 0,
    };
    for (&p, &label) in probabilities.iter().zip(labels.iter()) {
        let predicted_positive = p >= threshold;
        match (label.is_positive(), predicted_positive) {
            (true, true) => cm.true_positives += 1,
            (true, false) => cm.false_negatives += 1,
            (false, false) => cm.true_negatives += 1,
            (false, true) => cm.false_positives += 1,
        }
    }
    cm
}

/// Counts outcomes with positive-iff-`p >= threshold`.
pub fn confusion(
    probabilities: &[f64],
    labels: &[Label],
    threshold: f64,
) -> Result<ConfusionMatrix> {
    if probabilities.len() != labels.len() {
        return Err(Error::LengthMismatch {
            probabilities: probabilities.len(),
            labels: labels.len(),
        });
    }
    if probabilities.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidThreshold { value: threshold });
    }
    Ok(count_at(probabilities, labels, threshold))
}

fn ratio(numerator: usize, denominator: usize) -> Option<f64> {
    if denominator == 0 {
        None
    } else {
        Some(numerator as f64 / denominator as f64)
    }
}

/// Applies the metric formulas to a confusion matrix.
pub fn compute_metrics(cm: &ConfusionMatrix, threshold: f64) -> MetricsReport {
    let sensitivity = ratio(cm.true_positives, cm.true_positives + cm.false_negatives);
    let specificity = ratio(cm.true_negatives, cm.true_negatives + cm.false_positives);
    let accuracy = ratio(cm.true_positives + cm.true_negatives, cm.total());
    let precision = ratio(cm.true_positives, cm.true_positives + cm.false_positives);
    let recall = sensitivity;
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    MetricsReport {
        threshold,
        sensitivity,
        specificity,
        accuracy,
        precision,
        recall,
        f1,
        n: cm.total(),
        target_met: None,
    }
}

/// Chooses the operating threshold for a sensitivity target.
///
/// Candidates are the distinct probability values plus 0. Among candidates
/// whose sensitivity meets the target, the largest threshold wins (it
/// maximizes specificity); if none qualifies the result is threshold 0 with
/// `target_met: false`.
pub fn tune_threshold(
    probabilities: &[f64],
    labels: &[Label],
    target_sensitivity: f64,
) -> Result<(f64, MetricsReport)> {
    if probabilities.len() != labels.len() {
        return Err(Error::LengthMismatch {
            probabilities: probabilities.len(),
            labels: labels.len(),
        });
    }
    if probabilities.is_empty() {
        return Err(Error::EmptyInput);
    }
    if target_sensitivity.is_nan() || target_sensitivity <= 0.0 || target_sensitivity > 1.0 {
        return Err(Error::InvalidTarget {
            value: target_sensitivity,
        });
    }
    if !labels.iter().any(|l| l.is_positive()) {
        return Err(Error::NoPositiveLabels);
    }

    let mut candidates: Vec<f64> = probabilities.to_vec();
    candidates.push(0.0);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    for &threshold in candidates.iter().rev() {
        let cm = count_at(probabilities, labels, threshold);
        let sensitivity = ratio(cm.true_positives, cm.true_positives + cm.false_negatives)
            .expect("positives exist");
        if sensitivity >= target_sensitivity {
            let mut report = compute_metrics(&cm, threshold);
            report.target_met = Some(true);
            return Ok((threshold, report));
        }
    }
    // Unreachable for valid targets: candidate 0 classifies everything
    // positive, giving sensitivity 1.0. Kept as the contract's explicit
    // infeasible arm.
    let cm = count_at(probabilities, labels, 0.0);
    let mut report = compute_metrics(&cm, 0.0);
    report.target_met = Some(false);
    Ok((0.0, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_basic() {
        let cm = confusion(
            &[0.9, 0.2],
            &[Label::Pneumonia, Label::Normal],
            0.5,
        )
        .unwrap();
        assert_eq!(cm.true_positives, 1);
        assert_eq!(cm.true_negatives, 1);
        assert_eq!(cm.false_positives, 0);
        assert_eq!(cm.false_negatives, 0);
    }

    #[test]
    fn threshold_zero_marks_everything_positive() {
        let probs = [0.1, 0.5, 0.9, 0.0];
        let labels = [
            Label::Pneumonia,
            Label::Normal,
            Label::Pneumonia,
            Label::Normal,
        ];
        let cm = confusion(&probs, &labels, 0.0).unwrap();
        assert_eq!(cm.false_negatives, 0);
        assert_eq!(cm.true_negatives, 0);
        assert_eq!(cm.true_positives, 2);
        assert_eq!(cm.false_positives, 2);
    }

    #[test]
    fn confusion_input_validation() {
        assert!(matches!(
            confusion(&[0.5], &[], 0.5),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(confusion(&[], &[], 0.5), Err(Error::EmptyInput)));
        assert!(matches!(
            confusion(&[0.5], &[Label::Normal], 1.5),
            Err(Error::InvalidThreshold { .. })
        ));
    }

    #[test]
    fn metrics_formula_evaluation() {
        let cm = ConfusionMatrix {
            true_positives: 90,
            false_negatives: 10,
            true_negatives: 78,
            false_positives: 22,
        };
        let report = compute_metrics(&cm, 0.5);
        assert_eq!(report.sensitivity, Some(0.90));
        assert_eq!(report.specificity, Some(0.78));
        assert_eq!(report.accuracy, Some(0.84));
        let precision = 90.0 / 112.0;
        assert!((report.precision.unwrap() - precision).abs() < 1e-12);
        let f1 = 2.0 * precision * 0.9 / (precision + 0.9);
        assert!((report.f1.unwrap() - f1).abs() < 1e-12);
        assert!((report.f1.unwrap() - 0.8491).abs() < 1e-4);
        assert_eq!(report.recall, report.sensitivity);
        assert_eq!(report.n, 200);
    }

    #[test]
    fn zero_denominators_are_undefined() {
        let cm = ConfusionMatrix {
            true_positives: 0,
            false_negatives: 0,
            true_negatives: 5,
            false_positives: 3,
        };
        let report = compute_metrics(&cm, 0.5);
        assert_eq!(report.sensitivity, None);
        assert_eq!(report.recall, None);
        assert_eq!(report.f1, None);
        assert!(report.specificity.is_some());
    }

    // A 39%-prevalence evaluation set reproduces the screening profile of
    // sensitivity 0.90, specificity ~0.777, accuracy 0.825 simultaneously;
    // a balanced set cannot.
    #[test]
    fn screening_profile_on_imbalanced_set() {
        let cm = ConfusionMatrix {
            true_positives: 351,
            false_negatives: 39,
            true_negatives: 474,
            false_positives: 136,
        };
        let report = compute_metrics(&cm, 0.5);
        assert_eq!(report.sensitivity, Some(0.90));
        assert!((report.specificity.unwrap() - 0.777).abs() < 1e-3);
        assert_eq!(report.accuracy, Some(0.825));
    }

    #[test]
    fn tune_prefers_largest_feasible_threshold() {
        let probs = [0.2, 0.6, 0.9];
        let labels = [Label::Normal, Label::Pneumonia, Label::Pneumonia];
        let (threshold, report) = tune_threshold(&probs, &labels, 1.0).unwrap();
        assert_eq!(threshold, 0.6);
        assert_eq!(report.sensitivity, Some(1.0));
        assert_eq!(report.specificity, Some(1.0));
        assert_eq!(report.target_met, Some(true));
    }

    #[test]
    fn tune_requires_positive_labels() {
        assert!(matches!(
            tune_threshold(&[0.5, 0.7], &[Label::Normal, Label::Normal], 0.9),
            Err(Error::NoPositiveLabels)
        ));
    }

    #[test]
    fn tune_rejects_bad_target() {
        let labels = [Label::Pneumonia];
        assert!(matches!(
            tune_threshold(&[0.5], &labels, 0.0),
            Err(Error::InvalidTarget { .. })
        ));
        assert!(matches!(
            tune_threshold(&[0.5], &labels, 1.1),
            Err(Error::InvalidTarget { .. })
        ));
    }

    #[test]
    fn tune_threshold_feasibility_is_maximal() {
        // Against full enumeration on a pseudo-random instance.
        let mut probs = Vec::new();
        let mut labels = Vec::new();
        let mut state = 0x2545f4914f6cdd1du64;
        for i in 0..200 {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            probs.push((state >> 11) as f64 / (1u64 << 53) as f64);
            labels.push(if i % 3 == 0 {
                Label::Pneumonia
            } else {
                Label::Normal
            });
        }
        let target = 0.9;
        let (threshold, report) = tune_threshold(&probs, &labels, target).unwrap();
        assert!(report.sensitivity.unwrap() >= target);

        let mut candidates: Vec<f64> = probs.clone();
        candidates.push(0.0);
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();
        for &c in &candidates {
            if c > threshold {
                let cm = confusion(&probs, &labels, c).unwrap();
                let sens = cm.true_positives as f64
                    / (cm.true_positives + cm.false_negatives) as f64;
                assert!(sens < target, "candidate {c} should fail the target");
            }
        }
    }

    #[test]
    fn report_serializes_with_fixed_key_order() {
        let report = compute_metrics(
            &ConfusionMatrix {
                true_positives: 1,
                false_negatives: 0,
                true_negatives: 1,
                false_positives: 0,
            },
            0.5,
        );
        let json = serde_json::to_string(&report).unwrap();
        let keys = [
            "threshold",
            "sensitivity",
            "specificity",
            "accuracy",
            "precision",
            "recall",
            "f1",
            "n",
            "target_met",
        ];
        let mut last = 0;
        for key in keys {
            let pos = json.find(&alloc::format!("\"{key}\"")).unwrap();
            assert!(pos > last || key == "threshold");
            last = pos;
        }
        assert!(json.contains("\"target_met\":null"));
    }
}
