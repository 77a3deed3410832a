//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export wraps a plain function returning `Result<_, String>`, so the same
//! logic is unit-tested natively.

use deeponet_lab::bounds::{evaluate, BoundInputs, Theorem};
use deeponet_lab::datagen::{solve_adr, unit_grid, AdrConfig, GrfConfig, GrfPrior};
use deeponet_lab::rng;
use wasm_bindgen::prelude::*;

/// One GRF forcing on `nodes` uniform points of `[0, 1]`.
pub fn grf_values(length_scale: f64, nodes: usize, seed: u64) -> Result<Vec<f64>, String> {
    let config =
        GrfConfig::new(unit_grid(nodes), GrfPrior::new(length_scale)).map_err(|e| e.to_string())?;
    let sampler = config.sampler().map_err(|e| e.to_string())?;
    Ok(sampler.sample(&mut rng::seeded(seed)))
}

#[wasm_bindgen]
pub struct AdrField {
    nx: usize,
    nt: usize,
    source: Vec<f64>,
    values: Vec<f64>,
}

#[wasm_bindgen]
impl AdrField {
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Forcing `f(x)` on the space grid.
    pub fn source(&self) -> Vec<f64> {
        self.source.clone()
    }

    /// `u(x_i, t_j)` at index `i * nt + j`.
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }
}

pub fn adr_field(
    length_scale: f64,
    diffusion: f64,
    reaction: f64,
    nodes: usize,
    seed: u64,
) -> Result<AdrField, String> {
    let config = AdrConfig {
        diffusion,
        reaction,
        nx: nodes,
        nt: nodes,
    };
    let f = grf_values(length_scale, nodes, seed)?;
    let sol = solve_adr(&f, &config).map_err(|e| e.to_string())?;
    Ok(AdrField {
        nx: nodes,
        nt: nodes,
        source: f,
        values: sol.u.iter().copied().collect(),
    })
}

/// `q` lower bound at each training-set size in `ns`, for bound inputs given as JSON.
pub fn q_curve(inputs_json: &str, sigmoid: bool, ns: &[f64]) -> Result<Vec<f64>, String> {
    let base: BoundInputs = serde_json::from_str(inputs_json).map_err(|e| e.to_string())?;
    let which = if sigmoid {
        Theorem::Sigmoid
    } else {
        Theorem::General
    };
    ns.iter()
        .map(|&n| {
            let inputs = BoundInputs { n, ..base.clone() };
            evaluate(&inputs, which)
                .map(|r| r.q_lower)
                .map_err(|e| e.to_string())
        })
        .collect()
}

#[wasm_bindgen(js_name = grfSample)]
pub fn grf_sample(length_scale: f64, nodes: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    grf_values(length_scale, nodes, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = adrSolve)]
pub fn adr_solve(
    length_scale: f64,
    diffusion: f64,
    reaction: f64,
    nodes: usize,
    seed: u32,
) -> Result<AdrField, JsError> {
    adr_field(length_scale, diffusion, reaction, nodes, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = qLowerCurve)]
pub fn q_lower_curve(inputs_json: &str, sigmoid: bool, ns: Vec<f64>) -> Result<Vec<f64>, JsError> {
    q_curve(inputs_json, sigmoid, &ns).map_err(|e| JsError::new(&e))
}
