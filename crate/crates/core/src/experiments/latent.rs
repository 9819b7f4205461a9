//! Generation in the latent space of a frozen autoencoder.
//!
//! An autoencoder is pre-trained on `manifold32` and then frozen. The
//! generator learns to match the distribution of encoded real data; its
//! samples are decoded back to data space only for evaluation.

use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor};
use crate::cf::QueryPoints;
use crate::error::{Error, Result};
use crate::experiments::metrics::energy_distance;
use crate::experiments::toy::{make_toy_dataset, ToySpec};
use crate::nets::Autoencoder;
use crate::rng::{gaussian_matrix, seeded, stream};
use crate::samplers::sample_base_points_with;
use crate::training::{adam_step, cf_loss_at, train_loop, AdamState, Batcher, Direction, MetricsRow, TrainConfig, Trainer};

/// Seed of the `manifold32` sample used by every latent experiment.
pub const LATENT_DATA_SEED: u64 = 0;
pub const LATENT_DATA_SIZE: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AeConfig {
    pub n: usize,
    pub steps: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for AeConfig {
    fn default() -> Self {
        AeConfig {
            n: LATENT_DATA_SIZE,
            steps: 3000,
            batch: 128,
            lr: 3e-3,
            seed: 0,
        }
    }
}

/// The dataset the autoencoder and the latent experiment share.
pub fn latent_dataset(n: usize) -> Result<Tensor> {
    make_toy_dataset(&ToySpec::manifold32(n, LATENT_DATA_SEED))
}

/// Pre-trains a default-size autoencoder with Adam on mean squared
/// reconstruction error. Returns the model and its MSE on the full set.
pub fn pretrain_autoencoder(data: &Tensor, config: &AeConfig) -> Result<(Autoencoder, f64)> {
    if config.batch < 2 || config.batch > data.rows() {
        return Err(Error::config("batch", format!("{} is not in [2, {}]", config.batch, data.rows())));
    }
    if !(config.lr > 0.0 && config.lr.is_finite()) {
        return Err(Error::config("lr", format!("learning rate {} must be positive", config.lr)));
    }
    let mut ae = Autoencoder::default_sizes(config.seed);
    if data.cols() != ae.encoder.spec.input_width() {
        return Err(Error::shape("pretrain_autoencoder", format!("data width {}", data.cols())));
    }
    let mut enc_opt = AdamState::new(&ae.encoder.params);
    let mut dec_opt = AdamState::new(&ae.decoder.params);
    let mut batcher = Batcher::new(data.rows(), config.seed);
    for step in 0..config.steps {
        let batch = data.select_rows(&batcher.next_indices(config.batch));
        let mut tape = Tape::new();
        let ev = ae.encoder.params.bind(&mut tape);
        let dv = ae.decoder.params.bind(&mut tape);
        let x = tape.constant(&batch);
        let z = ae.encoder.forward(&mut tape, x, &ev)?;
        let r = ae.decoder.forward(&mut tape, z, &dv)?;
        let d = tape.sub(r, x)?;
        let sq = tape.square(d)?;
        let loss = tape.mean(sq)?;
        if !tape.scalar(loss)?.is_finite() {
            return Err(Error::Diverged {
                step,
                detail: "non-finite reconstruction loss".into(),
            });
        }
        let grads = tape.backward(loss)?;
        ae.encoder.params.absorb_grads(&grads, &ev)?;
        ae.decoder.params.absorb_grads(&grads, &dv)?;
        adam_step(&mut ae.encoder.params, &mut enc_opt, config.lr, Direction::Descent)?;
        adam_step(&mut ae.decoder.params, &mut dec_opt, config.lr, Direction::Descent)?;
    }
    let mse = ae.reconstruction_mse(data)?;
    Ok((ae, mse))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentConfig {
    pub train: TrainConfig,
    /// Rows of the dataset kept out of training for energy distances.
    pub holdout: usize,
    /// Generated samples drawn at each evaluation.
    pub eval_samples: usize,
    /// Fixed frequencies for the evaluation CF loss.
    pub eval_points: usize,
}

impl Default for LatentConfig {
    fn default() -> Self {
        LatentConfig {
            train: TrainConfig {
                steps: 5000,
                ..TrainConfig::default()
            },
            holdout: 2000,
            eval_samples: 2000,
            eval_points: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatentRow {
    pub step: usize,
    pub cf_loss: f64,
    pub energy_latent: f64,
    pub energy_data: f64,
}

#[derive(Debug, Clone)]
pub struct LatentOutcome {
    pub trace: Vec<LatentRow>,
    pub metrics: Vec<MetricsRow>,
    pub trainer: Trainer,
    /// Final generated latents (`eval_samples x latent`).
    pub generated_latents: Tensor,
    /// The same samples decoded to data space.
    pub generated_data: Tensor,
    pub ae_unchanged: bool,
}

/// Fixed evaluation state: held-out and full latents, eval noise and eval
/// frequencies, all independent of the training streams.
struct Evaluator<'a> {
    ae: &'a Autoencoder,
    all_latents: Tensor,
    heldout_latents: Tensor,
    heldout_data: Tensor,
    noise: Tensor,
    points: QueryPoints,
}

impl Evaluator<'_> {
    fn generate(&self, trainer: &Trainer) -> Result<Tensor> {
        trainer.generator.apply(&self.noise)
    }

    fn row(&self, trainer: &Trainer, step: usize) -> Result<LatentRow> {
        let gen = self.generate(trainer)?;
        let decoded = self.ae.decode(&gen)?;
        Ok(LatentRow {
            step,
            cf_loss: cf_loss_at(&self.all_latents, &gen, self.points.tensor())?,
            energy_latent: energy_distance(&gen, &self.heldout_latents)?,
            energy_data: energy_distance(&decoded, &self.heldout_data)?,
        })
    }
}

/// Trains a generator on the latents of `data` under the frozen `ae`.
///
/// The evaluation CF loss compares `eval_samples` generated latents (from
/// fixed noise) against the latents of the whole dataset at fixed
/// frequencies, so successive rows differ only through the generator. The
/// trace always ends with a row for the final step.
pub fn run_latent_experiment(ae: &Autoencoder, data: &Tensor, config: &LatentConfig) -> Result<LatentOutcome> {
    if !ae.is_frozen() {
        return Err(Error::Contract("the autoencoder must be frozen before generator training".into()));
    }
    if config.holdout < 2 || config.holdout + 2 > data.rows() {
        return Err(Error::config("holdout", format!("{} leaves too few training rows", config.holdout)));
    }
    if config.eval_samples < 2 || config.eval_points < 1 {
        return Err(Error::config("eval_samples", "evaluation sizes must be positive"));
    }
    let before = (ae.encoder.params.flat_values(), ae.decoder.params.flat_values());
    let split = data.rows() - config.holdout;
    let train_idx: Vec<usize> = (0..split).collect();
    let hold_idx: Vec<usize> = (split..data.rows()).collect();
    let all_latents = ae.encode(data)?;
    let train_latents = all_latents.select_rows(&train_idx);
    let seed = config.train.seed;
    let mut eval_rng = seeded(seed, stream::EVAL);
    let evaluator = Evaluator {
        ae,
        heldout_latents: all_latents.select_rows(&hold_idx),
        heldout_data: data.select_rows(&hold_idx),
        noise: gaussian_matrix(&mut eval_rng, config.eval_samples, config.train.noise_dim),
        points: sample_base_points_with(&mut eval_rng, config.eval_points.max(2), ae.latent_dim())?,
        all_latents,
    };

    let mut trace = Vec::new();
    let outcome = train_loop(&train_latents, config.train.clone(), |trainer, row| {
        trace.push(evaluator.row(trainer, row.step)?);
        Ok(())
    })?;
    let last = config.train.steps - 1;
    if trace.last().map(|r| r.step) != Some(last) {
        trace.push(evaluator.row(&outcome.trainer, last)?);
    }
    let generated_latents = evaluator.generate(&outcome.trainer)?;
    let generated_data = ae.decode(&generated_latents)?;
    let after = (ae.encoder.params.flat_values(), ae.decoder.params.flat_values());
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let ae_unchanged = bits(&before.0) == bits(&after.0) && bits(&before.1) == bits(&after.1);
    Ok(LatentOutcome {
        trace,
        metrics: outcome.metrics,
        trainer: outcome.trainer,
        generated_latents,
        generated_data,
        ae_unchanged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_pretraining_reduces_error() {
        let data = latent_dataset(500).unwrap();
        let untrained = Autoencoder::default_sizes(1).reconstruction_mse(&data).unwrap();
        let cfg = AeConfig {
            n: 500,
            steps: 200,
            batch: 64,
            lr: 3e-3,
            seed: 1,
        };
        let (ae, mse) = pretrain_autoencoder(&data, &cfg).unwrap();
        assert!(mse < untrained);
        assert_eq!(ae.decode(&ae.encode(&data).unwrap()).unwrap().shape(), data.shape());
    }

    #[test]
    fn unfrozen_autoencoder_rejected() {
        let data = latent_dataset(100).unwrap();
        let ae = Autoencoder::default_sizes(0);
        let cfg = LatentConfig {
            holdout: 20,
            ..LatentConfig::default()
        };
        assert!(matches!(run_latent_experiment(&ae, &data, &cfg), Err(Error::Contract(_))));
    }

    #[test]
    fn tiny_run_keeps_autoencoder_fixed() {
        let data = latent_dataset(200).unwrap();
        let mut ae = Autoencoder::default_sizes(0);
        ae.freeze();
        let cfg = LatentConfig {
            train: TrainConfig {
                steps: 3,
                log_every: 1,
                b_d: 32,
                b_g: 32,
                b_t: 8,
                sampler: crate::samplers::SamplerConfig {
                    hidden: 8,
                    ..Default::default()
                },
                ..TrainConfig::default()
            },
            holdout: 50,
            eval_samples: 50,
            eval_points: 8,
        };
        let out = run_latent_experiment(&ae, &data, &cfg).unwrap();
        assert!(out.ae_unchanged);
        assert_eq!(out.trace.len(), 3);
        assert_eq!(out.trace.last().unwrap().step, 2);
        assert_eq!(out.generated_latents.shape(), &[50, 8]);
        assert_eq!(out.generated_data.shape(), &[50, 32]);
        let again = run_latent_experiment(&ae, &data, &cfg).unwrap();
        assert_eq!(out.trace, again.trace);
    }
}
