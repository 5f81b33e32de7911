use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::NnError;
use crate::autodiff::{Scalar, Tape, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenActivation {
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    Identity,
    Sigmoid,
}

impl OutputActivation {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputActivation::Identity => "identity",
            OutputActivation::Sigmoid => "sigmoid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "identity" => Some(OutputActivation::Identity),
            "sigmoid" => Some(OutputActivation::Sigmoid),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpConfig {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
    pub seed: u64,
}

impl MlpConfig {
    pub fn new(layer_sizes: Vec<usize>, output_activation: OutputActivation, seed: u64) -> Self {
        Self { layer_sizes, hidden_activation: HiddenActivation::Tanh, output_activation, seed }
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.layer_sizes.len() < 2 {
            return Err(NnError::Config(format!(
                "need at least 2 layer sizes, got {}",
                self.layer_sizes.len()
            )));
        }
        if self.layer_sizes.iter().any(|&s| s == 0) {
            return Err(NnError::Config("layer sizes must be positive".into()));
        }
        Ok(())
    }
}

/// One affine map; `weights` is row-major with shape `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Fully connected network with tanh hidden layers.
///
/// The flat parameter order used by [`Mlp::flat_params`] and
/// [`Mlp::forward_with`] is, for each layer in turn, the row-major weights
/// followed by the biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    config: MlpConfig,
    layers: Vec<DenseLayer>,
}

impl Mlp {
    /// Weights uniform in ±1/sqrt(fan_in) from a seeded ChaCha stream, biases zero.
    pub fn init(config: MlpConfig) -> Result<Self, NnError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let layers = config
            .layer_sizes
            .windows(2)
            .map(|w| {
                let (inputs, outputs) = (w[0], w[1]);
                let bound = 1.0 / (inputs as f64).sqrt();
                let weights = (0..inputs * outputs).map(|_| rng.gen_range(-bound..=bound)).collect();
                DenseLayer { inputs, outputs, weights, biases: vec![0.0; outputs] }
            })
            .collect();
        Ok(Self { config, layers })
    }

    /// Build from explicit layers, checking them against `config`.
    pub fn from_layers(config: MlpConfig, layers: Vec<DenseLayer>) -> Result<Self, NnError> {
        config.validate()?;
        if layers.len() + 1 != config.layer_sizes.len() {
            return Err(NnError::Shape(format!(
                "{} layers for {} layer sizes",
                layers.len(),
                config.layer_sizes.len()
            )));
        }
        for (l, (layer, w)) in layers.iter().zip(config.layer_sizes.windows(2)).enumerate() {
            if layer.inputs != w[0]
                || layer.outputs != w[1]
                || layer.weights.len() != w[0] * w[1]
                || layer.biases.len() != w[1]
            {
                return Err(NnError::Shape(format!("layer {l} does not match {}x{}", w[1], w[0])));
            }
        }
        Ok(Self { config, layers })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.config.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.config.layer_sizes.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(DenseLayer::param_count).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.biases);
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<(), NnError> {
        if params.len() != self.param_count() {
            return Err(NnError::Shape(format!(
                "{} parameters for a network with {}",
                params.len(),
                self.param_count()
            )));
        }
        let mut offset = 0;
        for layer in &mut self.layers {
            let nw = layer.weights.len();
            layer.weights.copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            let nb = layer.biases.len();
            layer.biases.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }

    /// Record every parameter on `tape` as a trainable leaf.
    pub fn register<'t>(&self, tape: &'t Tape) -> Vec<Var<'t>> {
        self.flat_params().into_iter().map(|p| tape.param(p)).collect()
    }

    /// Forward pass using the flat parameter vector `params` in place of the
    /// stored ones, so the same code serves plain and taped evaluation.
    pub fn forward_with<S: Scalar>(&self, params: &[S], input: &[S]) -> Result<Vec<S>, NnError> {
        if params.len() != self.param_count() {
            return Err(NnError::Shape(format!(
                "{} parameters for a network with {}",
                params.len(),
                self.param_count()
            )));
        }
        if input.len() != self.input_dim() {
            return Err(NnError::Shape(format!(
                "input of length {} for input layer of size {}",
                input.len(),
                self.input_dim()
            )));
        }
        let last = self.layers.len() - 1;
        let mut offset = 0;
        let mut x: Vec<S> = input.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let w = &params[offset..offset + layer.weights.len()];
            offset += layer.weights.len();
            let b = &params[offset..offset + layer.outputs];
            offset += layer.outputs;
            let mut y = Vec::with_capacity(layer.outputs);
            for r in 0..layer.outputs {
                let row = &w[r * layer.inputs..(r + 1) * layer.inputs];
                let mut acc = b[r];
                for (wi, xi) in row.iter().zip(&x) {
                    acc = acc + *wi * *xi;
                }
                y.push(if l < last {
                    acc.tanh()
                } else {
                    match self.config.output_activation {
                        OutputActivation::Identity => acc,
                        OutputActivation::Sigmoid => acc.sigmoid(),
                    }
                });
            }
            x = y;
        }
        Ok(x)
    }

    /// Plain evaluation with the stored parameters.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        self.forward_with(&self.flat_params(), input)
    }
}
