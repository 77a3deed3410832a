//! Dense feed-forward networks and their optimizer.

mod adam;
mod mlp;

pub use adam::AdamState;
pub use mlp::{
    Activation, ForwardTrace, HiddenActivation, InitScheme, LayerView, MlpParams, MlpSpec,
    OutputActivation,
};

/// Number of trainable parameters of a network with the given layer widths:
/// `sum_l dims[l] * dims[l + 1] + dims[l + 1]`.
pub fn param_count(layer_dims: &[usize]) -> usize {
    layer_dims
        .windows(2)
        .map(|pair| pair[0] * pair[1] + pair[1])
        .sum()
}

/// Euclidean norm of a parameter vector.
pub fn l2_norm(flat: &[f64]) -> f64 {
    flat.iter().map(|w| w * w).sum::<f64>().sqrt()
}
