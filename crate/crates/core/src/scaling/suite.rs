use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CellSpec, ExperimentPlan};
use crate::datagen::{build_adr_dataset, Dataset, DatasetOptions};
use crate::deeponet::{DeepOnet, Trainer};
use crate::{rng, Error, Result};

const INIT_STREAM: u64 = 0x494E_4954;

/// Outcome of training one cell with one seed. A failed cell keeps whatever loss
/// curve it recorded before failing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub q: u64,
    pub n: u64,
    pub width: usize,
    pub param_count: usize,
    pub seed: u64,
    pub loss_curve: Vec<f64>,
    /// `None` when no epoch finished.
    pub final_loss: Option<f64>,
    pub best_loss: Option<f64>,
    pub wall_time_s: f64,
    pub failure: Option<String>,
}

impl CellResult {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    /// Everything except the wall time, which is the only nondeterministic field.
    pub fn same_outcome(&self, other: &CellResult) -> bool {
        CellResult {
            wall_time_s: 0.0,
            ..self.clone()
        } == CellResult {
            wall_time_s: 0.0,
            ..other.clone()
        }
    }
}

/// Training data of a cell: the first `n` triples of the plan's shared ADR data.
pub fn cell_dataset(plan: &ExperimentPlan, n: u64) -> Result<Dataset> {
    let n = n as usize;
    let functions = n.div_ceil(plan.points_per_function);
    let mut options = DatasetOptions::new(plan.branch_in, functions, plan.data_seed);
    options.points_per_function = plan.points_per_function;
    options.noise_std = plan.noise_std;
    build_adr_dataset(&plan.grf, &plan.pde, &options)?.truncate(n)
}

fn train_cell(
    cell: &CellSpec,
    plan: &ExperimentPlan,
    seed: u64,
    data: &Dataset,
    curve: &mut Vec<f64>,
) -> Result<()> {
    let init_seed = rng::derive_seed(seed, INIT_STREAM ^ cell.q);
    let model = DeepOnet::init(plan.branch_spec(cell)?, plan.trunk_spec(cell)?, init_seed)?;
    let mut trainer = Trainer::new(model, plan.lr, seed).with_init_seed(init_seed);
    let result = trainer.train(data, plan.epochs, plan.batch_size, None);
    curve.extend_from_slice(trainer.loss_curve());
    result
}

/// Trains a fresh DeepONet on the cell's data for `plan.epochs` epochs. Generation
/// or training failures are recorded in the result instead of being returned.
pub fn run_cell(cell: &CellSpec, plan: &ExperimentPlan, seed: u64) -> CellResult {
    let start = Instant::now();
    let mut curve = Vec::new();
    let outcome =
        cell_dataset(plan, cell.n).and_then(|data| train_cell(cell, plan, seed, &data, &mut curve));
    CellResult {
        q: cell.q,
        n: cell.n,
        width: cell.width,
        param_count: cell.param_count,
        seed,
        final_loss: curve.last().copied(),
        best_loss: curve.iter().copied().reduce(f64::min),
        loss_curve: curve,
        wall_time_s: start.elapsed().as_secs_f64(),
        failure: outcome.err().map(|e| e.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub plan: ExperimentPlan,
    pub cells: Vec<CellSpec>,
    /// Ordered by cell, then by seed.
    pub results: Vec<CellResult>,
}

/// Runs every cell with every seed of the plan on at most `threads` workers
/// (all cores when `None`). Plan errors are returned, cell failures recorded.
pub fn run_suite(plan: &ExperimentPlan, threads: Option<usize>) -> Result<SuiteResult> {
    run_suite_with(plan, threads, |_| {})
}

/// As [`run_suite`], calling `on_done` as each cell finishes.
pub fn run_suite_with<F>(
    plan: &ExperimentPlan,
    threads: Option<usize>,
    on_done: F,
) -> Result<SuiteResult>
where
    F: Fn(&CellResult) + Sync,
{
    let cells = plan.cells()?;
    let jobs: Vec<(CellSpec, u64)> = cells
        .iter()
        .flat_map(|c| plan.seeds.iter().map(move |&s| (*c, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::config(format!("cannot start worker pool: {e}")))?;
    let results = pool.install(|| {
        jobs.par_iter()
            .map(|(cell, seed)| {
                let r = run_cell(cell, plan, *seed);
                on_done(&r);
                r
            })
            .collect()
    });
    Ok(SuiteResult {
        plan: plan.clone(),
        cells,
        results,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedVerdict {
    pub seed: u64,
    /// `(q, best_loss)` of the successful cells, in increasing `q`.
    pub best_losses: Vec<(u64, f64)>,
    pub monotone: bool,
    /// Best loss at the smallest `q` minus best loss at the largest `q`.
    pub improvement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityVerdict {
    pub per_seed: Vec<SeedVerdict>,
    /// More than half of the seeds are monotone.
    pub majority_monotone: bool,
    /// Mean of the per-seed improvements that are defined.
    pub mean_improvement: Option<f64>,
    /// `(q, n, seed)` of the failed cells left out of the verdict.
    pub excluded: Vec<(u64, u64, u64)>,
}

/// Whether `best_loss` is non-increasing along increasing `q`, per seed and by
/// majority across seeds. Failed cells are excluded and listed.
pub fn check_monotonic(suite: &SuiteResult) -> MonotonicityVerdict {
    let mut seeds: Vec<u64> = suite.results.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();

    let excluded = suite
        .results
        .iter()
        .filter(|r| r.failed())
        .map(|r| (r.q, r.n, r.seed))
        .collect();

    let per_seed: Vec<SeedVerdict> = seeds
        .iter()
        .map(|&seed| {
            let mut best_losses: Vec<(u64, f64)> = suite
                .results
                .iter()
                .filter(|r| r.seed == seed && !r.failed())
                .filter_map(|r| r.best_loss.map(|b| (r.q, b)))
                .collect();
            best_losses.sort_by_key(|&(q, _)| q);
            let monotone = best_losses.windows(2).all(|w| w[1].1 <= w[0].1);
            let improvement = match (best_losses.first(), best_losses.last()) {
                (Some(a), Some(b)) if best_losses.len() > 1 => Some(a.1 - b.1),
                _ => None,
            };
            SeedVerdict {
                seed,
                best_losses,
                monotone,
                improvement,
            }
        })
        .collect();

    let monotone = per_seed.iter().filter(|v| v.monotone).count();
    let improvements: Vec<f64> = per_seed.iter().filter_map(|v| v.improvement).collect();
    MonotonicityVerdict {
        majority_monotone: 2 * monotone > per_seed.len(),
        mean_improvement: (!improvements.is_empty())
            .then(|| improvements.iter().sum::<f64>() / improvements.len() as f64),
        per_seed,
        excluded,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotFiles {
    pub curves: PathBuf,
    pub summary: PathBuf,
    pub suite: PathBuf,
}

#[derive(Serialize)]
struct SuiteSummary<'a> {
    plan: &'a ExperimentPlan,
    verdict: MonotonicityVerdict,
    cells: Vec<CellSummary<'a>>,
}

#[derive(Serialize)]
struct CellSummary<'a> {
    q: u64,
    n: u64,
    width: usize,
    param_count: usize,
    seed: u64,
    best_loss: Option<f64>,
    final_loss: Option<f64>,
    wall_time_s: f64,
    failure: Option<&'a str>,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Writes `curves.csv` (`q,n,seed,epoch,loss`), `summary.csv`
/// (`q,n,seed,best_loss,final_loss`) and `suite.json` into `dir`.
pub fn emit_plot_data(suite: &SuiteResult, dir: &Path) -> Result<PlotFiles> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = PlotFiles {
        curves: dir.join("curves.csv"),
        summary: dir.join("summary.csv"),
        suite: dir.join("suite.json"),
    };

    let mut curves = csv::Writer::from_path(&files.curves)?;
    curves.write_record(["q", "n", "seed", "epoch", "loss"])?;
    for r in &suite.results {
        for (epoch, loss) in r.loss_curve.iter().enumerate() {
            curves.write_record([
                r.q.to_string(),
                r.n.to_string(),
                r.seed.to_string(),
                (epoch + 1).to_string(),
                loss.to_string(),
            ])?;
        }
    }
    curves.flush().map_err(|e| Error::io(&files.curves, e))?;

    let mut summary = csv::Writer::from_path(&files.summary)?;
    summary.write_record(["q", "n", "seed", "best_loss", "final_loss"])?;
    for r in &suite.results {
        summary.write_record([
            r.q.to_string(),
            r.n.to_string(),
            r.seed.to_string(),
            opt(r.best_loss),
            opt(r.final_loss),
        ])?;
    }
    summary.flush().map_err(|e| Error::io(&files.summary, e))?;

    let report = SuiteSummary {
        plan: &suite.plan,
        verdict: check_monotonic(suite),
        cells: suite
            .results
            .iter()
            .map(|r| CellSummary {
                q: r.q,
                n: r.n,
                width: r.width,
                param_count: r.param_count,
                seed: r.seed,
                best_loss: r.best_loss,
                final_loss: r.final_loss,
                wall_time_s: r.wall_time_s,
                failure: r.failure.as_deref(),
            })
            .collect(),
    };
    let mut out = File::create(&files.suite).map_err(|e| Error::io(&files.suite, e))?;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out).map_err(|e| Error::io(&files.suite, e))?;
    Ok(files)
}
