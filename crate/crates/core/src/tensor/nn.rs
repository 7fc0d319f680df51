use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::graph::{Graph, Var};
use super::store::{ParamId, ParamStore};
use super::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    /// Leaky ReLU whose negative slope is a learned scalar shared by the layer.
    Prelu,
}

/// How dropout layers behave on a forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropoutMode {
    Train,
    /// Dropout stays active at inference; repeated passes give different outputs.
    Sample,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    pub activation: Activation,
    /// Apply the activation after the last layer too.
    pub final_activation: bool,
    /// Dropout rate after each hidden activation.
    pub dropout: f64,
}

impl MlpSpec {
    pub fn new(widths: &[usize], activation: Activation) -> Self {
        Self {
            widths: widths.to_vec(),
            activation,
            final_activation: false,
            dropout: 0.0,
        }
    }

    pub fn with_dropout(mut self, rate: f64) -> Self {
        self.dropout = rate;
        self
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().expect("validated spec has widths")
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 2 {
            return Err(Error::invalid("an MLP needs at least two widths"));
        }
        if self.widths.contains(&0) {
            return Err(Error::invalid("MLP widths must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Layer {
    weight: ParamId,
    bias: ParamId,
    slope: Option<ParamId>,
}

/// A stack of affine layers registered in a [`ParamStore`] under a name prefix.
#[derive(Debug, Clone)]
pub struct Mlp {
    spec: MlpSpec,
    layers: Vec<Layer>,
}

impl Mlp {
    /// Registers `{prefix}.{i}.weight`, `.bias` and (PReLU) `.slope` for every layer.
    /// Weights use He-normal initialization, biases start at zero, slopes at 0.25.
    pub fn new<R: Rng + ?Sized>(
        store: &mut ParamStore,
        prefix: &str,
        spec: MlpSpec,
        rng: &mut R,
    ) -> Result<Self> {
        spec.validate()?;
        let n_layers = spec.widths.len() - 1;
        let mut layers = Vec::with_capacity(n_layers);
        for (i, w) in spec.widths.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt())
                .map_err(|e| Error::invalid(e.to_string()))?;
            let values: Vec<f64> = (0..fan_in * fan_out).map(|_| normal.sample(rng)).collect();
            let weight = store.insert(
                format!("{prefix}.{i}.weight"),
                Tensor::new(fan_in, fan_out, values)?,
            )?;
            let bias = store.insert(format!("{prefix}.{i}.bias"), Tensor::zeros(1, fan_out))?;
            let activated = i + 1 < n_layers || spec.final_activation;
            let slope = if activated && spec.activation == Activation::Prelu {
                Some(store.insert(format!("{prefix}.{i}.slope"), Tensor::scalar(0.25))?)
            } else {
                None
            };
            layers.push(Layer {
                weight,
                bias,
                slope,
            });
        }
        Ok(Self { spec, layers })
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn param_ids(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.layers
            .iter()
            .flat_map(|l| [Some(l.weight), Some(l.bias), l.slope])
            .flatten()
    }

    pub fn forward<R: Rng + ?Sized>(
        &self,
        g: &mut Graph,
        store: &ParamStore,
        x: Var,
        mode: DropoutMode,
        rng: &mut R,
    ) -> Result<Var> {
        let width = g.value(x).cols();
        if width != self.spec.input_width() {
            return Err(Error::shape(
                "mlp_forward",
                format!("input width {width}, expected {}", self.spec.input_width()),
            ));
        }
        let n_layers = self.layers.len();
        let mut h = x;
        for (i, layer) in self.layers.iter().enumerate() {
            let w = g.param(store, layer.weight);
            let b = g.param(store, layer.bias);
            h = g.affine(h, w, b)?;
            let hidden = i + 1 < n_layers;
            if hidden || self.spec.final_activation {
                h = match (self.spec.activation, layer.slope) {
                    (Activation::Prelu, Some(s)) => {
                        let s = g.param(store, s);
                        g.prelu(h, s)?
                    }
                    _ => g.relu(h)?,
                };
            }
            if hidden {
                h = g.dropout(h, self.spec.dropout, mode, rng)?;
            }
        }
        Ok(h)
    }
}
