//! Experiment plans at a fixed `q / n^e`, fixed-budget architecture sizing, and
//! suites of training cells with their loss curves and monotonicity verdicts.

mod plan;
mod suite;

pub use plan::{
    deeponet_param_count, make_plan, size_architecture, Anchor, CellSpec, ExperimentPlan, Exponent,
    PARAM_TOLERANCE,
};
pub use suite::{
    cell_dataset, check_monotonic, emit_plot_data, run_cell, run_suite, run_suite_with, CellResult,
    MonotonicityVerdict, PlotFiles, SeedVerdict, SuiteResult,
};
