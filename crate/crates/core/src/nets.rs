//! Plain multilayer perceptrons: the generator and the autoencoder whose
//! latent space serves as a frozen target.

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::params::ParamSet;
use crate::rng::{seeded, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::config("activation", format!("unknown activation `{other}`"))),
        }
    }
}

impl Activation {
    pub(crate) fn apply(self, tape: &mut Tape, x: Var) -> Result<Var> {
        match self {
            Activation::Tanh => tape.tanh(x),
            Activation::Relu => tape.relu(x),
        }
    }
}

/// Layer widths from input to output, with an activation between layers
/// and none after the last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub widths: Vec<usize>,
    pub activation: Activation,
}

impl MlpSpec {
    pub fn new(widths: Vec<usize>, activation: Activation) -> Result<Self> {
        if widths.len() < 3 {
            return Err(Error::Contract(format!(
                "an MLP needs at least one hidden layer, got widths {widths:?}"
            )));
        }
        if widths.contains(&0) {
            return Err(Error::Contract(format!("zero width in {widths:?}")));
        }
        Ok(MlpSpec { widths, activation })
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub spec: MlpSpec,
    pub params: ParamSet,
}

/// Uniform(-a, a) weights with `a = 1/sqrt(fan_in)`, zero biases.
pub(crate) fn uniform_weight(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> Tensor {
    let a = 1.0 / (fan_in as f64).sqrt();
    let values = (0..fan_in * fan_out)
        .map(|_| rng.random_range(-a..a))
        .collect();
    Tensor::new(vec![fan_in, fan_out], values).expect("finite init")
}

/// Initializes an MLP deterministically from `seed`.
pub fn mlp_init(spec: &MlpSpec, seed: u64) -> Mlp {
    mlp_init_prefixed(spec, seed, "")
}

pub(crate) fn mlp_init_prefixed(spec: &MlpSpec, seed: u64, prefix: &str) -> Mlp {
    let mut rng = seeded(seed, stream::INIT);
    let mut params = ParamSet::new();
    for (l, pair) in spec.widths.windows(2).enumerate() {
        params.push(format!("{prefix}l{l}.w"), uniform_weight(&mut rng, pair[0], pair[1]));
        params.push(format!("{prefix}l{l}.b"), Tensor::zeros(vec![pair[1]]));
    }
    Mlp {
        spec: spec.clone(),
        params,
    }
}

impl Mlp {
    /// Records the forward pass of a `batch x in` input. `vars` are the
    /// parameter handles returned by binding `self.params` on the same tape.
    pub fn forward(&self, tape: &mut Tape, x: Var, vars: &[Var]) -> Result<Var> {
        match tape.shape(x) {
            [_, d] if *d == self.spec.input_width() => {}
            s => {
                return Err(Error::shape(
                    "mlp forward",
                    format!("input {s:?}, expected width {}", self.spec.input_width()),
                ))
            }
        }
        if vars.len() != 2 * self.spec.num_layers() {
            return Err(Error::shape("mlp forward", "parameter handle count"));
        }
        let mut h = x;
        let last = self.spec.num_layers() - 1;
        for l in 0..=last {
            let z = tape.matmul(h, vars[2 * l])?;
            h = tape.add(z, vars[2 * l + 1])?;
            if l < last {
                h = self.spec.activation.apply(tape, h)?;
            }
        }
        Ok(h)
    }

    /// Forward pass on plain data with no gradient tracking.
    pub fn apply(&self, x: &Tensor) -> Result<Tensor> {
        let mut tape = Tape::new();
        let vars = self.params.bind_constant(&mut tape);
        let xv = tape.constant(x);
        let y = self.forward(&mut tape, xv, &vars)?;
        Ok(tape.tensor(y))
    }
}

/// Generator `G`: Gaussian noise of width `d_z` to samples of width `m`.
pub fn generator_spec(d_z: usize, m: usize) -> MlpSpec {
    MlpSpec::new(vec![d_z, 64, 64, m], Activation::Tanh).expect("valid generator spec")
}

pub const GENERATOR_NOISE_DIM: usize = 16;

/// Runs the generator on noise `z` (`b_g x d_z`).
pub fn generator_forward(tape: &mut Tape, z: Var, generator: &Mlp, vars: &[Var]) -> Result<Var> {
    generator.forward(tape, z, vars)
}

/// Symmetric tanh autoencoder `[data → hidden → latent → hidden → data]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Autoencoder {
    pub encoder: Mlp,
    pub decoder: Mlp,
}

pub const AE_DATA_DIM: usize = 32;
pub const AE_HIDDEN_DIM: usize = 24;
pub const AE_LATENT_DIM: usize = 8;

impl Autoencoder {
    pub fn init(data_dim: usize, hidden: usize, latent: usize, seed: u64) -> Result<Self> {
        let enc = MlpSpec::new(vec![data_dim, hidden, latent], Activation::Tanh)?;
        let dec = MlpSpec::new(vec![latent, hidden, data_dim], Activation::Tanh)?;
        Ok(Autoencoder {
            encoder: mlp_init_prefixed(&enc, seed, "enc."),
            decoder: mlp_init_prefixed(&dec, seed.wrapping_add(0x9e37_79b9), "dec."),
        })
    }

    pub fn default_sizes(seed: u64) -> Self {
        Self::init(AE_DATA_DIM, AE_HIDDEN_DIM, AE_LATENT_DIM, seed).expect("valid AE sizes")
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.spec.output_width()
    }

    pub fn freeze(&mut self) {
        self.encoder.params.freeze();
        self.decoder.params.freeze();
    }

    pub fn is_frozen(&self) -> bool {
        self.encoder.params.is_frozen() && self.decoder.params.is_frozen()
    }

    pub fn encode(&self, x: &Tensor) -> Result<Tensor> {
        self.encoder.apply(x)
    }

    pub fn decode(&self, z: &Tensor) -> Result<Tensor> {
        self.decoder.apply(z)
    }

    /// Mean squared reconstruction error over every coordinate.
    pub fn reconstruction_mse(&self, x: &Tensor) -> Result<f64> {
        let recon = self.decode(&self.encode(x)?)?;
        let n = x.len() as f64;
        Ok(x
            .values()
            .iter()
            .zip(recon.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n)
    }
}
