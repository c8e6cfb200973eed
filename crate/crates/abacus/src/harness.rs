//! Experiment orchestration: repeated runs over seeds, checkpoint metrics
//! against ground truth, CSV reporting, and the timing grid.

use std::io::Write;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimator::{run_abacus_with, RunOptions};
use crate::oracle::exact_count_stream;
use crate::parallel::{run_parabacus, run_parabacus_with, ParallelRunOptions};
use crate::stream::{generate_dynamic_stream, EdgeEvent};

/// Supported edge-list input formats for the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Tsv,
    Konect,
    Native,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Abacus,
    Parabacus,
    Exact,
}

/// One experiment: a mode, the sampling and batching parameters, and the
/// repetition seeds. With `alpha > 0` the input is treated as an
/// insertion-only base and each seed synthesizes its own dynamic stream.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub budget: usize,
    pub batch_size: usize,
    pub workers: usize,
    pub alpha: f64,
    pub seeds: Vec<u64>,
    /// Snapshot the estimate at every 10% of the stream.
    pub checkpoints: bool,
    /// Track ground truth alongside and fill in relative errors.
    pub with_exact: bool,
}

impl ExperimentConfig {
    pub fn new(mode: Mode, budget: usize) -> Self {
        ExperimentConfig {
            mode,
            budget,
            batch_size: 1024,
            workers: 1,
            alpha: 0.0,
            seeds: vec![0],
            checkpoints: false,
            with_exact: false,
        }
    }
}

/// One metrics row: the estimate at a stream offset for one seed.
#[derive(Debug, Clone)]
pub struct MetricsRow {
    pub seed: u64,
    pub offset: usize,
    pub estimate: f64,
    pub exact: Option<u64>,
    pub relative_error: Option<f64>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub rows: Vec<MetricsRow>,
}

impl ExperimentReport {
    /// CSV `seed,offset,estimate,exact,relative_error,elapsed_ms`, sorted by
    /// (seed, offset). Unavailable ground truth renders as empty fields.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "seed,offset,estimate,exact,relative_error,elapsed_ms")?;
        for row in &self.rows {
            let exact = row.exact.map(|x| x.to_string()).unwrap_or_default();
            let rel = row.relative_error.map(|x| x.to_string()).unwrap_or_default();
            writeln!(
                writer,
                "{},{},{},{},{},{}",
                row.seed, row.offset, row.estimate, exact, rel, row.elapsed_ms
            )?;
        }
        Ok(())
    }
}

/// |estimate - exact| / exact. Undefined when the exact count is not
/// positive.
pub fn relative_error(estimate: f64, exact: f64) -> Result<f64> {
    if exact <= 0.0 {
        return Err(Error::UndefinedMetric);
    }
    Ok((estimate - exact).abs() / exact)
}

fn checkpoint_offsets(n: usize, every_tenth: bool) -> Vec<usize> {
    if !every_tenth || n < 10 {
        return vec![n];
    }
    let mut offsets: Vec<usize> = (1..=10).map(|i| i * n / 10).collect();
    offsets.dedup();
    offsets
}

/// Runs the configured experiment over every seed and collects one metrics
/// row per (seed, checkpoint).
///
/// In parabacus mode every run is cross-checked against the sequential
/// estimator on the same stream, budget, and seed; any mismatch fails the
/// whole experiment with `EquivalenceViolation`.
pub fn run_experiment(events: &[EdgeEvent], config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let mut rows = Vec::new();
    for &seed in &config.seeds {
        let stream;
        let stream_ref: &[EdgeEvent] = if config.alpha > 0.0 {
            stream = generate_dynamic_stream(events, config.alpha, seed)?;
            &stream
        } else {
            events
        };
        let offsets = checkpoint_offsets(stream_ref.len(), config.checkpoints);
        let exact = if config.with_exact || config.mode == Mode::Exact {
            Some(exact_count_stream(stream_ref, &offsets)?)
        } else {
            None
        };
        let exact_at = |offset: usize| -> Option<u64> {
            exact.as_ref().and_then(|e| {
                e.checkpoints
                    .iter()
                    .find(|&&(o, _)| o == offset)
                    .map(|&(_, c)| c)
            })
        };

        match config.mode {
            Mode::Exact => {
                let start = Instant::now();
                let result = exact.as_ref().expect("exact mode always counts");
                let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
                for &(offset, count) in &result.checkpoints {
                    rows.push(MetricsRow {
                        seed,
                        offset,
                        estimate: count as f64,
                        exact: Some(count),
                        relative_error: Some(0.0),
                        elapsed_ms,
                    });
                }
            }
            Mode::Abacus | Mode::Parabacus => {
                let opts = RunOptions { checkpoints: offsets.clone(), ..Default::default() };
                let sequential = run_abacus_with(stream_ref, config.budget, seed, &opts)?;
                let run_checkpoints = if config.mode == Mode::Parabacus {
                    let popts =
                        ParallelRunOptions { checkpoints: offsets.clone(), ..Default::default() };
                    let parallel = run_parabacus_with(
                        stream_ref,
                        config.budget,
                        seed,
                        config.batch_size,
                        config.workers,
                        &popts,
                    )?;
                    if parallel.ledger.estimate.to_bits() != sequential.ledger.estimate.to_bits() {
                        return Err(Error::EquivalenceViolation(format!(
                            "seed {seed}: parallel estimate {} vs sequential {}",
                            parallel.ledger.estimate, sequential.ledger.estimate
                        )));
                    }
                    parallel.checkpoints
                } else {
                    sequential.checkpoints
                };
                for cp in run_checkpoints {
                    let exact = exact_at(cp.offset);
                    let rel = exact.and_then(|x| relative_error(cp.estimate, x as f64).ok());
                    rows.push(MetricsRow {
                        seed,
                        offset: cp.offset,
                        estimate: cp.estimate,
                        exact,
                        relative_error: rel,
                        elapsed_ms: cp.elapsed.as_secs_f64() * 1e3,
                    });
                }
            }
        }
    }
    rows.sort_by_key(|r| (r.seed, r.offset));
    Ok(ExperimentReport { rows })
}

/// One cell of the timing grid.
#[derive(Debug, Clone, Copy)]
pub struct SpeedupCell {
    pub batch_size: usize,
    pub workers: usize,
    pub median_ms: f64,
}

/// Times the mini-batch estimator across a batch-size x worker grid,
/// median of three runs per cell. All cells must produce the identical
/// estimate; a mismatch is an `EquivalenceViolation`.
pub fn speedup_report(
    events: &[EdgeEvent],
    budget: usize,
    seed: u64,
    batch_sizes: &[usize],
    worker_counts: &[usize],
) -> Result<Vec<SpeedupCell>> {
    let mut cells = Vec::new();
    let mut reference: Option<u64> = None;
    for &batch_size in batch_sizes {
        for &workers in worker_counts {
            let mut times = Vec::with_capacity(3);
            for _ in 0..3 {
                let run = run_parabacus(events, budget, seed, batch_size, workers)?;
                let bits = run.ledger.estimate.to_bits();
                match reference {
                    None => reference = Some(bits),
                    Some(expected) if expected != bits => {
                        return Err(Error::EquivalenceViolation(format!(
                            "M={batch_size} p={workers}: estimate {} deviates",
                            run.ledger.estimate
                        )));
                    }
                    Some(_) => {}
                }
                times.push(run.elapsed.as_secs_f64() * 1e3);
            }
            times.sort_by(f64::total_cmp);
            cells.push(SpeedupCell { batch_size, workers, median_ms: times[1] });
        }
    }
    Ok(cells)
}

/// CSV `batch,workers,median_ms`.
pub fn write_speedup_csv<W: Write>(cells: &[SpeedupCell], mut writer: W) -> Result<()> {
    writeln!(writer, "batch,workers,median_ms")?;
    for cell in cells {
        writeln!(writer, "{},{},{}", cell.batch_size, cell.workers, cell.median_ms)?;
    }
    Ok(())
}
