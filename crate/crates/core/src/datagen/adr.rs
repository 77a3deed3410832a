//! Reference solver for `u_t = D u_xx + k u^2 + f(x)` on `[0, 1] x [0, 1]` with zero
//! initial and Dirichlet boundary values.
//!
//! Diffusion is treated with Crank-Nicolson, the reaction and source terms with an
//! explicit trapezoidal (Heun) predictor-corrector, giving second order in both
//! `dx` and `dt`. Each stage is one constant tridiagonal solve.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::unit_grid;
use crate::{Error, Result};

/// Magnitude beyond which the solution is declared divergent.
const BLOW_UP: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdrConfig {
    /// Diffusion coefficient `D`.
    pub diffusion: f64,
    /// Reaction rate `k`.
    pub reaction: f64,
    /// Nodes in `x`, boundaries included.
    pub nx: usize,
    /// Nodes in `t`, `t = 0` included.
    pub nt: usize,
}

impl Default for AdrConfig {
    fn default() -> Self {
        AdrConfig {
            diffusion: 0.01,
            reaction: 0.01,
            nx: 101,
            nt: 101,
        }
    }
}

impl AdrConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 || self.nt < 3 {
            return Err(Error::config(format!(
                "ADR grid needs at least 3 nodes per axis, got nx = {}, nt = {}",
                self.nx, self.nt
            )));
        }
        if !(self.diffusion >= 0.0) || !self.reaction.is_finite() {
            return Err(Error::config("diffusion must be >= 0 and reaction finite"));
        }
        Ok(())
    }

    pub fn x_grid(&self) -> Vec<f64> {
        unit_grid(self.nx)
    }

    pub fn t_grid(&self) -> Vec<f64> {
        unit_grid(self.nt)
    }
}

/// `u[[i, j]]` is the solution at `x_grid[i]`, `t_grid[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeSolution {
    pub u: Array2<f64>,
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub source: Vec<f64>,
}

/// Precomputed Thomas elimination for the constant matrix
/// `tridiag(-r, 1 + 2r, -r)`.
struct TridiagonalSolver {
    off: f64,
    c_prime: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl TridiagonalSolver {
    fn new(n: usize, r: f64) -> Self {
        let diag = 1.0 + 2.0 * r;
        let off = -r;
        let mut c_prime = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        let mut prev_c = 0.0;
        for i in 0..n {
            let denom = diag - off * prev_c;
            inv_denom[i] = 1.0 / denom;
            c_prime[i] = off * inv_denom[i];
            prev_c = c_prime[i];
        }
        TridiagonalSolver {
            off,
            c_prime,
            inv_denom,
        }
    }

    /// Solves in place; `rhs` becomes the solution.
    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        let mut prev = 0.0;
        for (r, inv) in rhs.iter_mut().zip(&self.inv_denom) {
            *r = (*r - self.off * prev) * inv;
            prev = *r;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] -= self.c_prime[i] * rhs[i + 1];
        }
    }
}

pub fn solve_adr(f: &[f64], config: &AdrConfig) -> Result<PdeSolution> {
    config.validate()?;
    if f.len() != config.nx {
        return Err(Error::input(format!(
            "source has {} values but the x grid has {} nodes",
            f.len(),
            config.nx
        )));
    }
    let (nx, nt) = (config.nx, config.nt);
    let h = 1.0 / (nx - 1) as f64;
    let dt = 1.0 / (nt - 1) as f64;
    let r = config.diffusion * dt / (2.0 * h * h);
    let k = config.reaction;
    let interior = nx - 2;
    let solver = TridiagonalSolver::new(interior, r);
    let src = &f[1..nx - 1];

    let mut u = Array2::zeros((nx, nt));
    let mut cur = vec![0.0; interior];
    let mut explicit = vec![0.0; interior];
    let mut stage = vec![0.0; interior];
    let reaction = |v: f64, s: f64| k * v * v + s;

    for step in 1..nt {
        // (I + r L) u^n with zero Dirichlet neighbours
        for i in 0..interior {
            let left = if i > 0 { cur[i - 1] } else { 0.0 };
            let right = if i + 1 < interior { cur[i + 1] } else { 0.0 };
            explicit[i] = cur[i] + r * (left - 2.0 * cur[i] + right);
        }
        for i in 0..interior {
            stage[i] = explicit[i] + dt * reaction(cur[i], src[i]);
        }
        solver.solve(&mut stage);
        for i in 0..interior {
            let avg = 0.5 * (reaction(cur[i], src[i]) + reaction(stage[i], src[i]));
            stage[i] = explicit[i] + dt * avg;
        }
        solver.solve(&mut stage);
        std::mem::swap(&mut cur, &mut stage);

        if let Some(i) = cur.iter().position(|v| !(v.abs() <= BLOW_UP)) {
            return Err(Error::Divergence {
                step,
                detail: format!("|u| exceeded {BLOW_UP:e} at x index {}", i + 1),
            });
        }
        for (i, &v) in cur.iter().enumerate() {
            u[[i + 1, step]] = v;
        }
    }

    Ok(PdeSolution {
        u,
        x_grid: config.x_grid(),
        t_grid: config.t_grid(),
        source: f.to_vec(),
    })
}
