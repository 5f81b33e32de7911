use super::{Mlp, MlpConfig, NnError, OutputActivation};
use crate::autodiff::{sigmoid, Scalar};

/// ln(p / (1 - p)).
pub fn inverse_sigmoid(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Derivative order α kept inside (0, 1) by a sigmoid.
///
/// `ScalarLogit` holds α as a single trainable logit. `TinyNet` is a
/// `[1, 32, 1]` network with a sigmoid output evaluated on `alpha_in`; after
/// each training iteration the realized α is fed back as the next `alpha_in`.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaParam {
    ScalarLogit { logit: f64 },
    TinyNet { net: Mlp, alpha_in: f64 },
}

impl AlphaParam {
    pub fn scalar(alpha_init: f64) -> Self {
        AlphaParam::ScalarLogit { logit: inverse_sigmoid(alpha_init) }
    }

    /// Network whose output bias is shifted so that it initially returns `alpha_init`
    /// when fed `alpha_init`.
    pub fn tiny_net(alpha_init: f64, seed: u64) -> Result<Self, NnError> {
        let mut net = Mlp::init(MlpConfig::new(vec![1, 32, 1], OutputActivation::Sigmoid, seed))?;
        let hidden: Vec<f64> = {
            let l0 = &net.layers()[0];
            (0..l0.outputs).map(|r| (l0.weights[r] * alpha_init + l0.biases[r]).tanh()).collect()
        };
        let out = &mut net.layers_mut()[1];
        let pre: f64 = out.weights.iter().zip(&hidden).map(|(w, h)| w * h).sum();
        out.biases[0] = inverse_sigmoid(alpha_init) - pre;
        Ok(AlphaParam::TinyNet { net, alpha_in: alpha_init })
    }

    pub fn param_count(&self) -> usize {
        match self {
            AlphaParam::ScalarLogit { .. } => 1,
            AlphaParam::TinyNet { net, .. } => net.param_count(),
        }
    }

    pub fn flat_params(&self) -> Vec<f64> {
        match self {
            AlphaParam::ScalarLogit { logit } => vec![*logit],
            AlphaParam::TinyNet { net, .. } => net.flat_params(),
        }
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<(), NnError> {
        match self {
            AlphaParam::ScalarLogit { logit } => {
                if params.len() != 1 {
                    return Err(NnError::Shape(format!("{} parameters for a scalar logit", params.len())));
                }
                *logit = params[0];
                Ok(())
            }
            AlphaParam::TinyNet { net, .. } => net.set_flat_params(params),
        }
    }

    /// Realized α from the flat parameters `params` (plain or taped).
    pub fn value_with<S: Scalar>(&self, params: &[S]) -> Result<S, NnError> {
        match self {
            AlphaParam::ScalarLogit { .. } => {
                if params.len() != 1 {
                    return Err(NnError::Shape(format!("{} parameters for a scalar logit", params.len())));
                }
                Ok(params[0].sigmoid())
            }
            AlphaParam::TinyNet { net, alpha_in } => {
                let first = params
                    .first()
                    .ok_or_else(|| NnError::Shape("empty parameter vector".into()))?;
                let input = first.lift(*alpha_in);
                Ok(net.forward_with(params, &[input])?[0])
            }
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            AlphaParam::ScalarLogit { logit } => sigmoid(*logit),
            AlphaParam::TinyNet { net, alpha_in } => net.forward(&[*alpha_in]).map(|v| v[0]).unwrap_or(f64::NAN),
        }
    }

    /// Feed the realized α of the finished iteration back as the next input.
    pub fn advance(&mut self, realized: f64) {
        if let AlphaParam::TinyNet { alpha_in, .. } = self {
            *alpha_in = realized;
        }
    }
}
