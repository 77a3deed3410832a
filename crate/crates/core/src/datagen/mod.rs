//! Synthetic operator-learning data: random forcings, reference solvers, datasets.

mod adr;
mod builders;
mod dataset;
mod grf;
mod pendulum;

pub use adr::{solve_adr, AdrConfig, PdeSolution};
pub use builders::{
    build_adr_dataset, build_pendulum_dataset, generate, sensor_indices, DatasetOptions,
    GeneratorConfig, QuerySampling,
};
pub use dataset::{
    read_dataset_csv, sidecar_path, write_dataset_csv, Dataset, DatasetMeta, SampleTriple,
};
pub use grf::{rbf_kernel, sample_grf, GrfConfig, GrfPrior, GrfSampler};
pub use pendulum::{solve_pendulum, PendulumConfig};

/// `n` uniformly spaced nodes covering `[0, 1]`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}
