//! The experiment protocol: a grid sweep over (extra layers x epochs) with
//! seeded repeated trials averaged per cell, per-trial threshold tuning, and
//! overfitting detection from training histories.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{AugmentPlan, Dataset, Label, Split};
use crate::error::{Error, Result};
use crate::metrics::{tune_threshold, MetricsReport};
use crate::model::{train, Model, ModelConfig, TrainConfig, TrainingHistory};
use crate::rng;

// ─── Grid ──────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub extra_layers: Vec<usize>,
    pub epochs: Vec<usize>,
    pub repeats: usize,
    pub base_seed: u64,
    pub target_sensitivity: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            extra_layers: alloc::vec![1, 2, 3, 4],
            epochs: alloc::vec![5, 10, 20],
            repeats: 5,
            base_seed: 42,
            target_sensitivity: 0.90,
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.extra_layers.is_empty() || self.epochs.is_empty() {
            return Err(Error::InvalidGrid {
                reason: String::from("extra_layers and epochs lists must be nonempty"),
            });
        }
        if self.repeats < 1 {
            return Err(Error::InvalidGrid {
                reason: String::from("repeats must be >= 1"),
            });
        }
        if self.target_sensitivity.is_nan()
            || self.target_sensitivity <= 0.0
            || self.target_sensitivity > 1.0
        {
            return Err(Error::InvalidTarget {
                value: self.target_sensitivity,
            });
        }
        Ok(())
    }

    /// Grid cells in enumeration order (layers outer, epochs inner).
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.extra_layers.len() * self.epochs.len());
        for &extra_layers in &self.extra_layers {
            for &epochs in &self.epochs {
                out.push(Cell {
                    extra_layers,
                    epochs,
                });
            }
        }
        out
    }

    /// Every `(cell, seed)` job: seeds are `base_seed + repeat_index` so any
    /// single trial can be reproduced in isolation.
    pub fn trial_jobs(&self) -> Vec<(Cell, u64)> {
        let mut out = Vec::new();
        for cell in self.cells() {
            for repeat in 0..self.repeats {
                out.push((cell, self.base_seed + repeat as u64));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub extra_layers: usize,
    pub epochs: usize,
}

// ─── Trials ────────────────────────────────────────────────────────────────

/// Everything a trial needs besides its cell and seed.
#[derive(Debug, Clone, Copy)]
pub struct TrialEnv<'a> {
    pub data: &'a Dataset,
    pub split: &'a Split,
    pub model_template: ModelConfig,
    pub train_template: TrainConfig,
    pub augment: Option<AugmentPlan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub cell: Cell,
    pub seed: u64,
    pub history: TrainingHistory,
    pub threshold: f64,
    pub report: MetricsReport,
}

/// Builds, trains, tunes the threshold on the test-set probabilities, and
/// reports all metrics at that threshold. Deterministic per (cell, seed, data).
pub fn run_trial(
    cell: Cell,
    seed: u64,
    target_sensitivity: f64,
    env: &TrialEnv<'_>,
) -> Result<TrialResult> {
    run_trial_inner(cell, seed, target_sensitivity, env).map_err(|source| Error::Trial {
        extra_layers: cell.extra_layers,
        epochs: cell.epochs,
        seed,
        source: Box::new(source),
    })
}

fn run_trial_inner(
    cell: Cell,
    seed: u64,
    target_sensitivity: f64,
    env: &TrialEnv<'_>,
) -> Result<TrialResult> {
    let model_config = ModelConfig {
        extra_layers: cell.extra_layers,
        ..env.model_template
    };
    let train_config = TrainConfig {
        epochs: cell.epochs,
        seed,
        ..env.train_template
    };
    let augment = env.augment.map(|plan| AugmentPlan { seed, ..plan });

    let mut init_rng = rng::seeded(seed, rng::stream::WEIGHT_INIT);
    let mut model = Model::build(&model_config, &mut init_rng)?;
    let history = train(
        &mut model,
        env.data.view(&env.split.train),
        env.data.view(&env.split.test),
        &train_config,
        augment.as_ref(),
    )?;

    let mut probabilities = Vec::with_capacity(env.split.test.len());
    let mut labels: Vec<Label> = Vec::with_capacity(env.split.test.len());
    for &index in &env.split.test {
        probabilities.push(model.predict_proba(env.data.image(index))?);
        labels.push(env.data.label(index));
    }
    let (threshold, report) = tune_threshold(&probabilities, &labels, target_sensitivity)?;

    Ok(TrialResult {
        cell,
        seed,
        history,
        threshold,
        report,
    })
}

// ─── Overfit detection ─────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverfitReport {
    pub flagged: bool,
    /// 1-based epoch at which the rule first fired; present iff flagged.
    pub first_flag_epoch: Option<usize>,
    /// Train-minus-validation accuracy gap at the flagged epoch (or the final
    /// epoch when not flagged).
    pub gap: f64,
    /// Validation-accuracy slope over the flagged window (or the final
    /// window when not flagged), in accuracy per epoch.
    pub val_slope: f64,
}

const OVERFIT_GAP: f64 = 0.05;

/// Flags the first epoch `e` (1-based) where, over the window `[e-2, e]`,
/// validation accuracy is non-increasing while training accuracy is
/// non-decreasing, and the train-validation gap at `e` is at least 0.05.
pub fn detect_overfit(history: &TrainingHistory) -> Result<OverfitReport> {
    let n = history.records.len();
    if n < 4 {
        return Err(Error::HistoryTooShort { len: n });
    }
    let train: Vec<f64> = history.records.iter().map(|r| r.train_acc).collect();
    let val: Vec<f64> = history.records.iter().map(|r| r.val_acc).collect();

    let window_slope = |end: usize| (val[end] - val[end - 2]) / 2.0;
    for end in 2..n {
        let val_non_increasing = val[end - 2] >= val[end - 1] && val[end - 1] >= val[end];
        let train_non_decreasing = train[end - 2] <= train[end - 1] && train[end - 1] <= train[end];
        let gap = train[end] - val[end];
        if val_non_increasing && train_non_decreasing && gap >= OVERFIT_GAP {
            return Ok(OverfitReport {
                flagged: true,
                first_flag_epoch: Some(end + 1),
                gap,
                val_slope: window_slope(end),
            });
        }
    }
    Ok(OverfitReport {
        flagged: false,
        first_flag_epoch: None,
        gap: train[n - 1] - val[n - 1],
        val_slope: window_slope(n - 1),
    })
}

// ─── Sweep report ──────────────────────────────────────────────────────────

/// Mean or sample standard deviation of each tuned metric across repeats.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricStats {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub extra_layers: usize,
    pub epochs: usize,
    pub repeats: usize,
    pub mean: MetricStats,
    pub std: MetricStats,
    pub overfit_flagged: bool,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cells: Vec<CellSummary>,
    pub best_cell: Option<Cell>,
}

/// Runs every trial sequentially and assembles the report. Callers that run
/// trials on their own executors feed [`assemble_report`] directly.
pub fn sweep(grid: &SweepGrid, env: &TrialEnv<'_>) -> Result<SweepReport> {
    grid.validate()?;
    let results: Vec<(Cell, u64, Result<TrialResult>)> = grid
        .trial_jobs()
        .into_iter()
        .map(|(cell, seed)| (cell, seed, run_trial(cell, seed, grid.target_sensitivity, env)))
        .collect();
    Ok(assemble_report(grid, results))
}

/// Groups trial results by cell and reduces them to the report. The result is
/// independent of the order of `results`; trials are keyed by (cell, seed).
pub fn assemble_report(
    grid: &SweepGrid,
    results: Vec<(Cell, u64, Result<TrialResult>)>,
) -> SweepReport {
    let mut cells = Vec::new();
    for cell in grid.cells() {
        let mut trials: Vec<&TrialResult> = results
            .iter()
            .filter(|(c, _, _)| *c == cell)
            .filter_map(|(_, _, r)| r.as_ref().ok())
            .collect();
        trials.sort_by_key(|t| t.seed);
        cells.push(summarize_cell(cell, grid.repeats, &trials));
    }
    let best_cell = select_best_cell(&cells, grid.target_sensitivity);
    SweepReport { cells, best_cell }
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        None
    } else {
        let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
        Some(libm::sqrt(ss / (n - 1.0)))
    };
    (Some(mean), std)
}

type MetricGetter = fn(&MetricsReport) -> Option<f64>;
type StatSlot = fn(&mut MetricStats) -> &mut Option<f64>;

fn summarize_cell(cell: Cell, repeats: usize, trials: &[&TrialResult]) -> CellSummary {
    let collect = |f: MetricGetter| -> Vec<f64> {
        trials.iter().filter_map(|t| f(&t.report)).collect()
    };
    let mut mean = MetricStats::default();
    let mut std = MetricStats::default();
    let fields: [(MetricGetter, StatSlot); 7] = [
        (|r| r.sensitivity, |s| &mut s.sensitivity),
        (|r| r.specificity, |s| &mut s.specificity),
        (|r| r.accuracy, |s| &mut s.accuracy),
        (|r| r.precision, |s| &mut s.precision),
        (|r| r.recall, |s| &mut s.recall),
        (|r| r.f1, |s| &mut s.f1),
        (|r| Some(r.threshold), |s| &mut s.threshold),
    ];
    for (get, slot) in fields {
        let values = collect(get);
        let (m, s) = mean_std(&values);
        *slot(&mut mean) = m;
        *slot(&mut std) = s;
    }

    let overfit_flagged = mean_history(trials)
        .and_then(|h| detect_overfit(&h).ok())
        .is_some_and(|r| r.flagged);

    CellSummary {
        extra_layers: cell.extra_layers,
        epochs: cell.epochs,
        repeats,
        mean,
        std,
        overfit_flagged,
        failed: trials.is_empty(),
    }
}

/// Pointwise mean of the trials' histories (all share the cell's epoch count).
fn mean_history(trials: &[&TrialResult]) -> Option<TrainingHistory> {
    let first = trials.first()?;
    let epochs = first.history.records.len();
    let mut records = Vec::with_capacity(epochs);
    for e in 0..epochs {
        let n = trials.len() as f64;
        let sum = |f: fn(&crate::model::EpochRecord) -> f64| -> f64 {
            trials.iter().map(|t| f(&t.history.records[e])).sum::<f64>() / n
        };
        records.push(crate::model::EpochRecord {
            train_loss: sum(|r| r.train_loss),
            train_acc: sum(|r| r.train_acc),
            val_loss: sum(|r| r.val_loss),
            val_acc: sum(|r| r.val_acc),
        });
    }
    Some(TrainingHistory { records })
}

/// Maximum mean specificity subject to mean sensitivity >= target; ties break
/// to higher accuracy, then fewer layers, then fewer epochs. `None` when no
/// cell qualifies.
fn select_best_cell(cells: &[CellSummary], target_sensitivity: f64) -> Option<Cell> {
    let mut best: Option<&CellSummary> = None;
    for cell in cells {
        if cell.failed {
            continue;
        }
        let Some(sensitivity) = cell.mean.sensitivity else {
            continue;
        };
        if sensitivity < target_sensitivity {
            continue;
        }
        let beats = match best {
            None => true,
            Some(current) => {
                let key = |c: &CellSummary| {
                    (
                        c.mean.specificity.unwrap_or(f64::NEG_INFINITY),
                        c.mean.accuracy.unwrap_or(f64::NEG_INFINITY),
                    )
                };
                let (spec_new, acc_new) = key(cell);
                let (spec_cur, acc_cur) = key(current);
                if spec_new != spec_cur {
                    spec_new > spec_cur
                } else if acc_new != acc_cur {
                    acc_new > acc_cur
                } else if cell.extra_layers != current.extra_layers {
                    cell.extra_layers < current.extra_layers
                } else {
                    cell.epochs < current.epochs
                }
            }
        };
        if beats {
            best = Some(cell);
        }
    }
    best.map(|c| Cell {
        extra_layers: c.extra_layers,
        epochs: c.epochs,
    })
}
