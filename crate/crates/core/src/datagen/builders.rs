use ndarray::Array2;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{
    solve_adr, solve_pendulum, unit_grid, AdrConfig, Dataset, DatasetMeta, GrfConfig, GrfPrior,
    PendulumConfig,
};
use crate::{rng, Error, Result};

const NOISE_STREAM: u64 = 0x004E_4F49_5345;
const QUERY_STREAM: u64 = 0x0051_5545_5259;

/// Which solution grid nodes are used as query points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum QuerySampling {
    /// Uniform over all nodes of the solution grid.
    Uniform,
    /// Uniform in space at one fixed time index.
    AtTimeIndex { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetOptions {
    /// `m`, sensors taken as a uniform subsample of the solver grid.
    pub sensor_count: usize,
    pub num_functions: usize,
    #[serde(default = "default_points_per_function")]
    pub points_per_function: usize,
    /// Standard deviation of additive Gaussian label noise.
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sampling")]
    pub query: QuerySampling,
}

fn default_points_per_function() -> usize {
    100
}

fn default_sampling() -> QuerySampling {
    QuerySampling::Uniform
}

impl DatasetOptions {
    pub fn new(sensor_count: usize, num_functions: usize, seed: u64) -> Self {
        DatasetOptions {
            sensor_count,
            num_functions,
            points_per_function: default_points_per_function(),
            noise_std: 0.0,
            seed,
            query: QuerySampling::Uniform,
        }
    }

    fn validate(&self, grid_len: usize) -> Result<()> {
        if self.sensor_count == 0 || self.sensor_count > grid_len {
            return Err(Error::config(format!(
                "sensor count {} must be between 1 and the grid size {grid_len}",
                self.sensor_count
            )));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::config("noise std must be non-negative"));
        }
        Ok(())
    }
}

/// Full description of how a dataset was generated, stored in its sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorConfig {
    Adr {
        grf: GrfPrior,
        pde: AdrConfig,
        options: DatasetOptions,
    },
    Pendulum {
        grf: GrfPrior,
        pendulum: PendulumConfig,
        /// Forcing samples (and solution times) on `[0, t_end]`.
        samples: usize,
        options: DatasetOptions,
    },
}

pub fn generate(config: &GeneratorConfig) -> Result<Dataset> {
    match config {
        GeneratorConfig::Adr { grf, pde, options } => build_adr_dataset(grf, pde, options),
        GeneratorConfig::Pendulum {
            grf,
            pendulum,
            samples,
            options,
        } => build_pendulum_dataset(grf, pendulum, *samples, options),
    }
}

/// `m` evenly spread indices into a grid of `grid_len` nodes, endpoints included.
pub fn sensor_indices(grid_len: usize, m: usize) -> Vec<usize> {
    if m == 1 {
        return vec![0];
    }
    (0..m)
        .map(|i| ((i * (grid_len - 1)) as f64 / (m - 1) as f64).round() as usize)
        .collect()
}

/// Function `i` of a dataset draws its forcing from stream `i` of `seed`, its query
/// nodes and its label noise from separate streams, so datasets built with more
/// functions extend smaller ones and noise never changes the clean labels.
struct Streams {
    seed: u64,
}

impl Streams {
    fn forcing(&self, i: usize) -> rng::Rng {
        rng::substream(self.seed, i as u64)
    }
    fn queries(&self, i: usize) -> rng::Rng {
        rng::substream(rng::derive_seed(self.seed, QUERY_STREAM), i as u64)
    }
    fn noise(&self, i: usize) -> rng::Rng {
        rng::substream(rng::derive_seed(self.seed, NOISE_STREAM), i as u64)
    }
}

/// ADR triples: `s` is a GRF forcing at the sensors, `p = (x, t)` a solution grid
/// node, `y` the reference solution there plus optional noise.
pub fn build_adr_dataset(
    grf: &GrfPrior,
    pde: &AdrConfig,
    options: &DatasetOptions,
) -> Result<Dataset> {
    pde.validate()?;
    options.validate(pde.nx)?;
    let x_grid = pde.x_grid();
    let t_grid = pde.t_grid();
    let sampler = GrfConfig::new(x_grid.clone(), *grf)?.sampler()?;
    let sensors_at = sensor_indices(pde.nx, options.sensor_count);
    let streams = Streams { seed: options.seed };

    let n = options.num_functions * options.points_per_function;
    let m = options.sensor_count;
    let mut sensors = Array2::zeros((n, m));
    let mut points = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);

    for func in 0..options.num_functions {
        let f = sampler.sample(&mut streams.forcing(func));
        let sol = solve_adr(&f, pde)?;
        let mut q_rng = streams.queries(func);
        let mut noise_rng = streams.noise(func);
        for k in 0..options.points_per_function {
            let row = func * options.points_per_function + k;
            let xi = q_rng.random_range(0..pde.nx);
            let ti = match options.query {
                QuerySampling::Uniform => q_rng.random_range(0..pde.nt),
                QuerySampling::AtTimeIndex { index } => index.min(pde.nt - 1),
            };
            for (c, &idx) in sensors_at.iter().enumerate() {
                sensors[[row, c]] = f[idx];
            }
            points[[row, 0]] = x_grid[xi];
            points[[row, 1]] = t_grid[ti];
            labels.push(sol.u[[xi, ti]] + noise(&mut noise_rng, options.noise_std));
        }
    }

    let meta = DatasetMeta {
        label_bound_override: None,
        sensor_grid: sensors_at.iter().map(|&i| x_grid[i]).collect(),
        noise_std: options.noise_std,
        seed: Some(options.seed),
        generator: Some(GeneratorConfig::Adr {
            grf: *grf,
            pde: *pde,
            options: *options,
        }),
    };
    Dataset::new(sensors, points, labels, meta)
}

/// Forced-pendulum triples: `s` is the forcing at `m` sensor times, `p = (t)` a
/// sample time, `y` the angle there plus optional noise.
pub fn build_pendulum_dataset(
    grf: &GrfPrior,
    pendulum: &PendulumConfig,
    samples: usize,
    options: &DatasetOptions,
) -> Result<Dataset> {
    if samples < 2 {
        return Err(Error::config("pendulum needs at least two time samples"));
    }
    options.validate(samples)?;
    let unit = unit_grid(samples);
    let times: Vec<f64> = unit.iter().map(|u| u * pendulum.t_end).collect();
    let sampler = GrfConfig::new(unit, *grf)?.sampler()?;
    let sensors_at = sensor_indices(samples, options.sensor_count);
    let streams = Streams { seed: options.seed };

    let n = options.num_functions * options.points_per_function;
    let mut sensors = Array2::zeros((n, options.sensor_count));
    let mut points = Array2::zeros((n, 1));
    let mut labels = Vec::with_capacity(n);

    for func in 0..options.num_functions {
        let f = sampler.sample(&mut streams.forcing(func));
        let y = solve_pendulum(pendulum, &f)?;
        let mut q_rng = streams.queries(func);
        let mut noise_rng = streams.noise(func);
        for k in 0..options.points_per_function {
            let row = func * options.points_per_function + k;
            let ti = match options.query {
                QuerySampling::Uniform => q_rng.random_range(0..samples),
                QuerySampling::AtTimeIndex { index } => index.min(samples - 1),
            };
            for (c, &idx) in sensors_at.iter().enumerate() {
                sensors[[row, c]] = f[idx];
            }
            points[[row, 0]] = times[ti];
            labels.push(y[ti] + noise(&mut noise_rng, options.noise_std));
        }
    }

    let meta = DatasetMeta {
        label_bound_override: None,
        sensor_grid: sensors_at.iter().map(|&i| times[i]).collect(),
        noise_std: options.noise_std,
        seed: Some(options.seed),
        generator: Some(GeneratorConfig::Pendulum {
            grf: *grf,
            pendulum: *pendulum,
            samples,
            options: *options,
        }),
    };
    Dataset::new(sensors, points, labels, meta)
}

fn noise(rng: &mut rng::Rng, std: f64) -> f64 {
    if std == 0.0 {
        0.0
    } else {
        std * rng.sample::<f64, _>(StandardNormal)
    }
}
