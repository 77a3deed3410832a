use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView1, ArrayView2, ArrayViewMut2, Axis, Zip};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HiddenActivation {
    Relu,
    Tanh,
}

/// Final-layer activation. `Sigmoid` and `Tanh` bound every output component by 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputActivation {
    Sigmoid,
    Tanh,
    Linear,
}

impl OutputActivation {
    /// Sup-norm bound on an output component, if the activation provides one.
    pub fn sup_bound(self) -> Option<f64> {
        match self {
            OutputActivation::Sigmoid | OutputActivation::Tanh => Some(1.0),
            OutputActivation::Linear => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitScheme {
    /// Normal with variance `2 / fan_in`.
    He,
    /// Normal with variance `2 / (fan_in + fan_out)`.
    Xavier,
}

/// Pointwise nonlinearity applied after each affine layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activation's output `a = act(z)`.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Linear => 1.0,
        }
    }
}

impl From<HiddenActivation> for Activation {
    fn from(value: HiddenActivation) -> Self {
        match value {
            HiddenActivation::Relu => Activation::Relu,
            HiddenActivation::Tanh => Activation::Tanh,
        }
    }
}

impl From<OutputActivation> for Activation {
    fn from(value: OutputActivation) -> Self {
        match value {
            OutputActivation::Sigmoid => Activation::Sigmoid,
            OutputActivation::Tanh => Activation::Tanh,
            OutputActivation::Linear => Activation::Linear,
        }
    }
}

/// Architecture of one feed-forward network.
///
/// `layer_dims` lists the input width first and the output width last, so a network
/// has `layer_dims.len() - 1` weight layers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MlpSpec {
    pub layer_dims: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
    pub init_scheme: InitScheme,
}

impl MlpSpec {
    /// Builds a validated spec; the init scheme is He for ReLU stacks and Xavier
    /// otherwise.
    pub fn new(
        layer_dims: Vec<usize>,
        hidden_activation: HiddenActivation,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        let init_scheme = match hidden_activation {
            HiddenActivation::Relu => InitScheme::He,
            HiddenActivation::Tanh => InitScheme::Xavier,
        };
        let spec = MlpSpec {
            layer_dims,
            hidden_activation,
            output_activation,
            init_scheme,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `[input, width x (depth - 1), output]`, i.e. `depth` weight layers of a uniform
    /// hidden width.
    pub fn uniform(
        input: usize,
        width: usize,
        depth: usize,
        output: usize,
        hidden_activation: HiddenActivation,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::config("depth must be at least 1"));
        }
        let mut dims = Vec::with_capacity(depth + 1);
        dims.push(input);
        dims.extend(std::iter::repeat_n(width, depth - 1));
        dims.push(output);
        Self::new(dims, hidden_activation, output_activation)
    }

    pub fn with_init(mut self, init_scheme: InitScheme) -> Self {
        self.init_scheme = init_scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_dims.len() < 2 {
            return Err(Error::config(format!(
                "an MLP needs at least an input and an output width, got {:?}",
                self.layer_dims
            )));
        }
        if let Some(pos) = self.layer_dims.iter().position(|&d| d == 0) {
            return Err(Error::config(format!(
                "layer width {pos} is zero in {:?}",
                self.layer_dims
            )));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        super::param_count(&self.layer_dims)
    }

    /// Number of weight layers.
    pub fn depth(&self) -> usize {
        self.layer_dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().expect("validated spec has layers")
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.depth() {
            self.output_activation.into()
        } else {
            self.hidden_activation.into()
        }
    }

    /// `(offset, fan_in, fan_out)` of each weight layer inside the flat vector.
    /// The weight matrix (row-major, `fan_out x fan_in`) is followed by the bias.
    fn layout(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.layer_dims.windows(2).scan(0usize, |offset, pair| {
            let at = *offset;
            *offset += pair[0] * pair[1] + pair[1];
            Some((at, pair[0], pair[1]))
        })
    }
}

/// Borrowed view of one affine layer.
#[derive(Debug, Clone, Copy)]
pub struct LayerView<'a> {
    /// `fan_out x fan_in`
    pub weights: ArrayView2<'a, f64>,
    pub bias: ArrayView1<'a, f64>,
}

/// A network's parameters as one flat vector, laid out layer by layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    spec: MlpSpec,
    flat: Vec<f64>,
}

/// Per-layer outputs of a batched forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `activations[0]` is the input batch, the last entry the network output.
    activations: Vec<Array2<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &Array2<f64> {
        self.activations
            .last()
            .expect("trace holds the input at least")
    }

    /// Input batch followed by every layer's post-activation output.
    pub fn activations(&self) -> &[Array2<f64>] {
        &self.activations
    }

    pub fn into_output(mut self) -> Array2<f64> {
        self.activations
            .pop()
            .expect("trace holds the input at least")
    }
}

impl MlpParams {
    pub fn zeros(spec: MlpSpec) -> Result<Self> {
        spec.validate()?;
        let flat = vec![0.0; spec.param_count()];
        Ok(MlpParams { spec, flat })
    }

    /// Random initialisation: weights are centred normals with the variance of the
    /// spec's init scheme, biases are zero. Deterministic in `seed`.
    pub fn init(spec: MlpSpec, seed: u64) -> Result<Self> {
        let mut params = Self::zeros(spec)?;
        let mut rng = rng::seeded(seed);
        let layout: Vec<_> = params.spec.layout().collect();
        for (offset, fan_in, fan_out) in layout {
            let variance = match params.spec.init_scheme {
                InitScheme::He => 2.0 / fan_in as f64,
                InitScheme::Xavier => 2.0 / (fan_in + fan_out) as f64,
            };
            let normal = Normal::new(0.0, variance.sqrt()).expect("positive variance");
            for w in &mut params.flat[offset..offset + fan_in * fan_out] {
                *w = normal.sample(&mut rng);
            }
        }
        Ok(params)
    }

    pub fn from_flat(spec: MlpSpec, flat: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if flat.len() != spec.param_count() {
            return Err(Error::input(format!(
                "spec {:?} has {} parameters, got a vector of length {}",
                spec.layer_dims,
                spec.param_count(),
                flat.len()
            )));
        }
        Ok(MlpParams { spec, flat })
    }

    /// Rebuilds the flat vector from per-layer `(weights, bias)` pairs.
    pub fn from_layers(spec: MlpSpec, layers: &[(Array2<f64>, Vec<f64>)]) -> Result<Self> {
        spec.validate()?;
        if layers.len() != spec.depth() {
            return Err(Error::input(format!(
                "expected {} layers, got {}",
                spec.depth(),
                layers.len()
            )));
        }
        let mut flat = Vec::with_capacity(spec.param_count());
        for ((_, fan_in, fan_out), (w, b)) in spec.layout().zip(layers) {
            if w.dim() != (fan_out, fan_in) || b.len() != fan_out {
                return Err(Error::input(format!(
                    "layer shape {:?}/{} does not match ({fan_out}, {fan_in})",
                    w.dim(),
                    b.len()
                )));
            }
            flat.extend(w.iter());
            flat.extend(b.iter());
        }
        Ok(MlpParams { spec, flat })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.flat
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.flat
    }

    pub fn l2_norm(&self) -> f64 {
        super::l2_norm(&self.flat)
    }

    /// Largest parameter magnitude.
    pub fn max_abs(&self) -> f64 {
        self.flat.iter().fold(0.0, |acc, w| acc.max(w.abs()))
    }

    pub fn layers(&self) -> impl Iterator<Item = LayerView<'_>> {
        self.spec.layout().map(|(offset, fan_in, fan_out)| {
            let split = offset + fan_in * fan_out;
            LayerView {
                weights: ArrayView2::from_shape((fan_out, fan_in), &self.flat[offset..split])
                    .expect("layout matches flat length"),
                bias: ArrayView1::from(&self.flat[split..split + fan_out]),
            }
        })
    }

    /// Owned copies of every layer; inverse of [`MlpParams::from_layers`].
    pub fn to_layers(&self) -> Vec<(Array2<f64>, Vec<f64>)> {
        self.layers()
            .map(|l| (l.weights.to_owned(), l.bias.to_vec()))
            .collect()
    }

    /// Scales the parameters onto the Euclidean ball of radius `radius` if they lie
    /// outside it.
    pub fn project_to_ball(&mut self, radius: f64) {
        let norm = self.l2_norm();
        if norm > radius && norm > 0.0 {
            let scale = radius / norm;
            self.flat.iter_mut().for_each(|w| *w *= scale);
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let batch = self.single_row(x)?;
        Ok(self.forward_batch(batch)?.into_raw_vec_and_offset().0)
    }

    /// Gradient of `<out_grad, forward(x)>` with respect to every parameter.
    pub fn backward(&self, x: &[f64], out_grad: &[f64]) -> Result<Vec<f64>> {
        let batch = self.single_row(x)?;
        let trace = self.forward_traced(batch)?;
        let out_grad =
            ArrayView2::from_shape((1, out_grad.len()), out_grad).expect("one row view of a slice");
        let mut grads = vec![0.0; self.flat.len()];
        self.backward_traced(&trace, out_grad, &mut grads)?;
        Ok(grads)
    }

    fn single_row<'a>(&self, x: &'a [f64]) -> Result<ArrayView2<'a, f64>> {
        if x.len() != self.spec.input_dim() {
            return Err(Error::input(format!(
                "input has length {}, network expects {}",
                x.len(),
                self.spec.input_dim()
            )));
        }
        Ok(ArrayView2::from_shape((1, x.len()), x).expect("one row view of a slice"))
    }

    /// Forward pass over a batch (one sample per row).
    pub fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_batch(&x)?;
        let mut a = x.to_owned();
        for (layer, view) in self.layers().enumerate() {
            a = self.affine_activate(layer, a.view(), view);
        }
        Ok(a)
    }

    pub fn forward_traced(&self, x: ArrayView2<'_, f64>) -> Result<ForwardTrace> {
        self.check_batch(&x)?;
        let mut activations = Vec::with_capacity(self.spec.depth() + 1);
        activations.push(x.to_owned());
        for (layer, view) in self.layers().enumerate() {
            let next = self.affine_activate(layer, activations[layer].view(), view);
            activations.push(next);
        }
        Ok(ForwardTrace { activations })
    }

    fn check_batch(&self, x: &ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.spec.input_dim() {
            return Err(Error::input(format!(
                "batch has {} columns, network expects {}",
                x.ncols(),
                self.spec.input_dim()
            )));
        }
        Ok(())
    }

    fn affine_activate(
        &self,
        layer: usize,
        input: ArrayView2<'_, f64>,
        view: LayerView<'_>,
    ) -> Array2<f64> {
        let mut z = Array2::zeros((input.nrows(), view.weights.nrows()));
        z.assign(&view.bias);
        general_mat_mul(1.0, &input, &view.weights.t(), 1.0, &mut z);
        let act = self.spec.activation(layer);
        if act != Activation::Linear {
            z.mapv_inplace(|v| act.apply(v));
        }
        z
    }

    /// Accumulates into `grads` the gradient of `sum_rows <out_grad_row, output_row>`
    /// for the batch recorded in `trace`. `grads` is overwritten, not added to.
    pub fn backward_traced(
        &self,
        trace: &ForwardTrace,
        out_grad: ArrayView2<'_, f64>,
        grads: &mut [f64],
    ) -> Result<()> {
        let output = trace.output();
        if out_grad.dim() != output.dim() {
            return Err(Error::input(format!(
                "output gradient has shape {:?}, network output is {:?}",
                out_grad.dim(),
                output.dim()
            )));
        }
        if grads.len() != self.flat.len() || trace.activations.len() != self.spec.depth() + 1 {
            return Err(Error::input(
                "gradient buffer or trace does not belong to this network",
            ));
        }

        let layout: Vec<_> = self.spec.layout().collect();
        let views: Vec<_> = self.layers().collect();
        let depth = self.spec.depth();

        // delta = dL/dz for the current layer
        let mut delta = out_grad.to_owned();
        let out_act = self.spec.activation(depth - 1);
        if out_act != Activation::Linear {
            Zip::from(&mut delta)
                .and(output)
                .for_each(|d, &a| *d *= out_act.derivative_from_output(a));
        }

        for layer in (0..depth).rev() {
            let (offset, fan_in, fan_out) = layout[layer];
            let split = offset + fan_in * fan_out;
            let (w_grad, rest) = grads[offset..split + fan_out].split_at_mut(fan_in * fan_out);
            let mut w_grad = ArrayViewMut2::from_shape((fan_out, fan_in), w_grad)
                .expect("layout matches flat length");
            let input = &trace.activations[layer];
            general_mat_mul(1.0, &delta.t(), input, 0.0, &mut w_grad);
            for (g, col) in rest.iter_mut().zip(delta.axis_iter(Axis(1))) {
                *g = col.sum();
            }

            if layer > 0 {
                let mut next = delta.dot(&views[layer].weights);
                let act = self.spec.activation(layer - 1);
                Zip::from(&mut next)
                    .and(input)
                    .for_each(|d, &a| *d *= act.derivative_from_output(a));
                delta = next;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn spec(dims: &[usize], out: OutputActivation) -> MlpSpec {
        MlpSpec::new(dims.to_vec(), HiddenActivation::Relu, out).unwrap()
    }

    #[test]
    fn param_count_small() {
        assert_eq!(spec(&[2, 3, 1], OutputActivation::Linear).param_count(), 13);
    }

    #[test]
    fn rejects_degenerate_specs() {
        assert!(matches!(
            MlpSpec::new(vec![3], HiddenActivation::Relu, OutputActivation::Linear),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            MlpSpec::new(
                vec![3, 0, 1],
                HiddenActivation::Relu,
                OutputActivation::Linear
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn init_is_deterministic() {
        let s = spec(&[2, 3, 1], OutputActivation::Linear);
        let a = MlpParams::init(s.clone(), 11).unwrap();
        let b = MlpParams::init(s.clone(), 11).unwrap();
        let c = MlpParams::init(s, 12).unwrap();
        assert_eq!(a.flat(), b.flat());
        assert_ne!(a.flat(), c.flat());
        // biases are zero
        assert_eq!(&a.flat()[6..9], &[0.0, 0.0, 0.0]);
        assert_eq!(a.flat()[12], 0.0);
    }

    #[test]
    fn he_variance_of_first_layer() {
        let s = spec(&[40, 50, 50, 50, 50, 5], OutputActivation::Tanh);
        assert_eq!(s.init_scheme, InitScheme::He);
        let p = MlpParams::init(s, 3).unwrap();
        let first = p.layers().next().unwrap().weights;
        let n = first.len() as f64;
        assert!(n >= 2000.0);
        let mean = first.sum() / n;
        let var = first.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / n;
        let target = 2.0 / 40.0;
        assert!((var - target).abs() / target < 0.15, "variance {var}");
    }

    #[test]
    fn zero_params_outputs() {
        let linear = MlpParams::zeros(spec(&[3, 4, 2], OutputActivation::Linear)).unwrap();
        assert_eq!(linear.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        let sigmoid = MlpParams::zeros(spec(&[3, 4, 2], OutputActivation::Sigmoid)).unwrap();
        assert_eq!(sigmoid.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn identity_layer() {
        let s = spec(&[1, 1], OutputActivation::Linear);
        let p = MlpParams::from_flat(s, vec![1.0, 0.0]).unwrap();
        assert_eq!(p.forward(&[3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn dimension_mismatch_is_input_error() {
        let p = MlpParams::zeros(spec(&[3, 2], OutputActivation::Linear)).unwrap();
        assert!(matches!(p.forward(&[1.0]), Err(Error::Input(_))));
        assert!(matches!(
            p.backward(&[1.0, 2.0, 3.0], &[1.0]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            MlpParams::from_flat(p.spec().clone(), vec![0.0; 3]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn linear_unit_gradient_by_hand() {
        let s = spec(&[1, 1], OutputActivation::Linear);
        let p = MlpParams::from_flat(s, vec![0.7, -0.2]).unwrap();
        let g = p.backward(&[2.5], &[1.0]).unwrap();
        assert_eq!(g, vec![2.5, 1.0]);
    }

    #[test]
    fn zero_out_grad_gives_zero_gradient() {
        let s = spec(&[3, 5, 2], OutputActivation::Tanh);
        let p = MlpParams::init(s, 5).unwrap();
        let g = p.backward(&[0.3, -0.1, 0.8], &[0.0, 0.0]).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn layers_round_trip() {
        let s = spec(&[3, 4, 2], OutputActivation::Tanh);
        let p = MlpParams::init(s.clone(), 9).unwrap();
        let back = MlpParams::from_layers(s, &p.to_layers()).unwrap();
        assert_eq!(p.flat(), back.flat());
    }

    #[test]
    fn bounded_outputs() {
        let s = MlpSpec::new(
            vec![2, 6, 3],
            HiddenActivation::Tanh,
            OutputActivation::Sigmoid,
        )
        .unwrap();
        let mut p = MlpParams::init(s, 1).unwrap();
        p.flat_mut().iter_mut().for_each(|w| *w *= 3.0);
        let out = p.forward(&[5.0, -4.0]).unwrap();
        assert!(out.iter().all(|&o| o > 0.0 && o < 1.0));
    }

    #[test]
    fn batch_matches_single_rows() {
        let s = spec(&[2, 5, 3], OutputActivation::Tanh);
        let p = MlpParams::init(s, 2).unwrap();
        let x = array![[0.1, 0.2], [-0.5, 1.5], [2.0, -1.0]];
        let batch = p.forward_batch(x.view()).unwrap();
        for (row, out) in x.rows().into_iter().zip(batch.rows()) {
            assert_eq!(p.forward(&row.to_vec()).unwrap(), out.to_vec());
        }
    }

    #[test]
    fn projection_onto_ball() {
        let s = spec(&[1, 1], OutputActivation::Linear);
        let mut p = MlpParams::from_flat(s, vec![3.0, 4.0]).unwrap();
        assert_eq!(p.l2_norm(), 5.0);
        p.project_to_ball(10.0);
        assert_eq!(p.flat(), &[3.0, 4.0]);
        p.project_to_ball(1.0);
        assert!((p.l2_norm() - 1.0).abs() < 1e-15);
    }
}
