//! Fixtures shared by the integration tests and the acceptance suite.

#![allow(dead_code, clippy::type_complexity, clippy::excessive_precision)]

use std::f64::consts::PI;

use deeponet_lab::bounds::{BoundInputs, FunctionClassSpec, JSource};
use deeponet_lab::datagen::{solve_adr, solve_pendulum, AdrConfig, PendulumConfig};

/// `(n, epsilon, delta, B, d_B, d_T, W_B, W_T, C, q)` with `q` evaluated at 50 digits
/// by `tests/oracles/bound_oracle.py`.
pub const GENERAL_ORACLE: [(f64, f64, f64, f64, u64, u64, f64, f64, f64, f64); 5] = [
    (
        1e6,
        1.0,
        0.5,
        1.0,
        100,
        20,
        2.0,
        3.0,
        1.0,
        1.2940540325824908242,
    ),
    (
        10000.0,
        0.5,
        0.1,
        2.0,
        3,
        2,
        1.0,
        1.0,
        1.0,
        0.57062617503743875679,
    ),
    (
        1.0,
        2.0,
        0.9,
        1.0,
        1,
        1,
        1.0,
        1.0,
        1.5,
        0.23208114925719693461,
    ),
    (
        3.5e8,
        0.05,
        0.01,
        0.25,
        18000,
        9000,
        10.0,
        4.0,
        2.0,
        0.49757317126208380562,
    ),
    (
        123456.0,
        1.5,
        0.75,
        3.0,
        7,
        40,
        1.25,
        8.0,
        1.0,
        0.72106682978332398263,
    ),
];

/// `(n, epsilon, delta, B, d_B, d_T, W, alpha, q)` for the sigmoid-gate bound.
pub const SIGMOID_ORACLE: [(f64, f64, f64, f64, u64, u64, f64, Option<f64>, f64); 5] = [
    (
        1e6,
        1.0,
        0.5,
        1.0,
        100,
        20,
        2.0,
        None,
        1.2961814896812466453,
    ),
    (
        10000.0,
        0.5,
        0.1,
        2.0,
        3,
        2,
        1.0,
        None,
        0.57062617503743875679,
    ),
    (
        1.0,
        2.0,
        0.9,
        1.0,
        1,
        1,
        1.0,
        Some(0.5),
        0.23208114925719693461,
    ),
    (
        3.5e8,
        0.05,
        0.01,
        0.25,
        18000,
        9000,
        10.0,
        None,
        0.4962880168548427522,
    ),
    (
        123456.0,
        1.5,
        0.75,
        3.0,
        7,
        40,
        1.25,
        Some(0.3),
        0.76209473443076485605,
    ),
];

#[allow(clippy::too_many_arguments)]
pub fn inputs(
    n: f64,
    epsilon: f64,
    delta: f64,
    b: f64,
    d_b: u64,
    d_t: u64,
    w_b: f64,
    w_t: f64,
    c: f64,
) -> BoundInputs {
    BoundInputs {
        n,
        epsilon,
        delta,
        label_bound: b,
        class: FunctionClassSpec {
            d_b,
            d_t,
            w_b,
            w_t,
            c,
            l_b: None,
            l_t: None,
            q: None,
        },
        j: 1.0,
        j_source: JSource::User,
        sigma2: 0.0,
        alpha: None,
    }
}

pub fn general_oracle_inputs() -> Vec<(BoundInputs, f64)> {
    GENERAL_ORACLE
        .iter()
        .map(|&(n, e, d, b, db, dt, wb, wt, c, q)| (inputs(n, e, d, b, db, dt, wb, wt, c), q))
        .collect()
}

pub fn sigmoid_oracle_inputs() -> Vec<(BoundInputs, f64)> {
    SIGMOID_ORACLE
        .iter()
        .map(|&(n, e, d, b, db, dt, w, alpha, q)| {
            let mut i = inputs(n, e, d, b, db, dt, w, w, 1.0);
            i.alpha = alpha;
            (i, q)
        })
        .collect()
}

/// Smooth source vanishing at both ends, so it is compatible with the zero
/// boundary and initial data.
pub fn smooth_source(x: f64) -> f64 {
    (PI * x).sin() + 0.5 * (2.0 * PI * x).sin()
}

/// Successive differences of ADR solutions on `base`, `2 base - 1` and `4 base - 3`
/// nodes (space and time refined together), measured in max norm on the coarse
/// nodes. Returns `(|u_h - u_h/2|, |u_h/2 - u_h/4|)`.
pub fn adr_successive_differences(base: usize, diffusion: f64, reaction: f64) -> (f64, f64) {
    let solve = |nodes: usize| {
        let config = AdrConfig {
            diffusion,
            reaction,
            nx: nodes,
            nt: nodes,
        };
        let f: Vec<f64> = config.x_grid().iter().map(|&x| smooth_source(x)).collect();
        solve_adr(&f, &config).unwrap().u
    };
    let coarse = solve(base);
    let mid = solve(2 * base - 1);
    let fine = solve(4 * base - 3);
    let mut d1 = 0.0f64;
    let mut d2 = 0.0f64;
    for i in 0..base {
        for j in 0..base {
            d1 = d1.max((coarse[[i, j]] - mid[[2 * i, 2 * j]]).abs());
            d2 = d2.max((mid[[2 * i, 2 * j]] - fine[[4 * i, 4 * j]]).abs());
        }
    }
    (d1, d2)
}

/// Same as [`adr_successive_differences`] for the forced pendulum, refining the RK4
/// step through `substeps` while the forcing samples stay fixed.
pub fn pendulum_successive_differences(samples: usize) -> (f64, f64) {
    let forcing: Vec<f64> = (0..samples)
        .map(|i| 0.5 * (2.0 * PI * i as f64 / (samples - 1) as f64).sin())
        .collect();
    let run = |substeps| {
        let config = PendulumConfig {
            k: 4.0,
            t_end: 2.0,
            substeps,
            y0: 1.0,
            v0: 0.5,
        };
        solve_pendulum(&config, &forcing).unwrap()
    };
    let (a, b, c) = (run(1), run(2), run(4));
    let max_diff = |u: &[f64], v: &[f64]| {
        u.iter()
            .zip(v)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    (max_diff(&a, &b), max_diff(&b, &c))
}

/// Largest deviation of the pendulum from the linearised solution
/// `y'' = -k y + a t` when the angle stays small.
pub fn pendulum_small_angle_error() -> f64 {
    let (k, a, y0, v0, t_end) = (4.0f64, 0.01, 0.01, 0.0, 1.0);
    let samples = 101;
    let times: Vec<f64> = (0..samples)
        .map(|i| t_end * i as f64 / (samples - 1) as f64)
        .collect();
    let forcing: Vec<f64> = times.iter().map(|&t| a * t).collect();
    let config = PendulumConfig {
        k,
        t_end,
        substeps: 1,
        y0,
        v0,
    };
    let y = solve_pendulum(&config, &forcing).unwrap();
    let w = k.sqrt();
    times
        .iter()
        .zip(&y)
        .map(|(&t, &y)| {
            let linear = y0 * (w * t).cos() + (v0 - a / k) / w * (w * t).sin() + a * t / k;
            (y - linear).abs()
        })
        .fold(0.0, f64::max)
}
