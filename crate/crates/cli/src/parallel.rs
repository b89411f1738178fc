//! Fan-out of sweep trials over a bounded number of worker threads. Results
//! are written back by task index and assembled in grid order, so the report
//! is byte-identical regardless of the number of jobs.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use pxcnn_core::experiment::{assemble_report, run_trial, SweepGrid, SweepReport, TrialEnv, TrialResult};
use pxcnn_core::Error as CoreError;

pub fn run_sweep(grid: &SweepGrid, env: &TrialEnv<'_>, jobs: usize) -> SweepReport {
    let tasks = grid.trial_jobs();
    let results: Mutex<Vec<Option<Result<TrialResult, CoreError>>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = jobs.max(1).min(tasks.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= tasks.len() {
                    break;
                }
                let (cell, seed) = tasks[index];
                let outcome = run_trial(cell, seed, grid.target_sensitivity, env);
                match &outcome {
                    Ok(trial) => eprintln!(
                        "trial extra_layers={} epochs={} seed={}: threshold={:.6} sensitivity={:?}",
                        cell.extra_layers,
                        cell.epochs,
                        seed,
                        trial.threshold,
                        trial.report.sensitivity
                    ),
                    Err(e) => eprintln!("trial failed: {e}"),
                }
                results.lock().expect("worker panicked")[index] = Some(outcome);
            });
        }
    });

    let ordered = tasks
        .into_iter()
        .zip(results.into_inner().expect("worker panicked"))
        .map(|((cell, seed), outcome)| (cell, seed, outcome.expect("every task ran")))
        .collect();
    assemble_report(grid, ordered)
}
