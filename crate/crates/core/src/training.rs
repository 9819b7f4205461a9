//! Alternating min-max training of a generator against a query-point
//! sampler.
//!
//! Each [`Trainer::train_step`] runs, in order:
//!
//! 1. take a real minibatch `X`;
//! 2. draw fresh noise `z` and generate `Y = G(z)`;
//! 3. draw fresh standard Gaussian query points `t`;
//! 4. augment every `t_i` with the observed discrepancy `|Φ_X(t_i) − Φ_Y(t_i)|`;
//! 5. propose `t' = S(t_aug)`, evaluate the CF loss at `t'` and take one
//!    Adam *ascent* step on the sampler (skipped for the Gaussian kind);
//! 6. propose again with the updated sampler, evaluate the CF loss at the new
//!    points and take one Adam *descent* step on the generator.

use std::time::Instant;

use rand::seq::SliceRandom;

use crate::autodiff::{Tape, Tensor, Var};
use crate::cf::{cf_loss, ecf, QueryPoints};
use crate::error::{Error, Result};
use crate::nets::{generator_spec, mlp_init, Mlp, GENERATOR_NOISE_DIM};
use crate::params::ParamSet;
use crate::rng::{gaussian_matrix, seeded, stream, SeededRng};
use crate::samplers::{augment_with_loss, propose, sample_base_points_with, AugmentedPoints, SamplerConfig, SamplerKind, SamplerParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ascent,
    Descent,
}

/// Bias-corrected Adam moments for one parameter group.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
}

impl AdamState {
    pub fn new(params: &ParamSet) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors().map(|t| vec![0.0; t.len()]).collect();
        AdamState {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.v
    }
}

/// One Adam update from the gradients stored in `params`. Ascent adds the
/// step, descent subtracts it.
pub fn adam_step(params: &mut ParamSet, state: &mut AdamState, lr: f64, dir: Direction) -> Result<()> {
    if params.is_frozen() {
        let name = params.iter().next().map_or("<empty>", |(n, _)| n).to_string();
        return Err(Error::Frozen(name));
    }
    if state.m.len() != params.len() || params.tensors().zip(&state.m).any(|(t, m)| t.len() != m.len()) {
        return Err(Error::shape("adam_step", "optimizer state does not match parameters"));
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let sign = match dir {
        Direction::Ascent => 1.0,
        Direction::Descent => -1.0,
    };
    let (b1, b2, eps) = (state.beta1, state.beta2, state.eps);
    for ((tensor, m), v) in params.tensors_mut().zip(state.m.iter_mut()).zip(state.v.iter_mut()) {
        let g = tensor
            .grad()
            .ok_or_else(|| Error::Contract("parameter without gradient buffer".into()))?
            .to_vec();
        for (i, p) in tensor.values_mut().iter_mut().enumerate() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let mhat = m[i] / bc1;
            let vhat = v[i] / bc2;
            *p += sign * lr * mhat / (vhat.sqrt() + eps);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Real-data minibatch size.
    pub b_d: usize,
    /// Generator batch size.
    pub b_g: usize,
    /// Query points per step.
    pub b_t: usize,
    pub lr_g: f64,
    pub lr_gnn: f64,
    pub steps: usize,
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub log_every: usize,
    pub noise_dim: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            b_d: 256,
            b_g: 256,
            b_t: 64,
            lr_g: 1e-3,
            lr_gnn: 1e-3,
            steps: 1000,
            seed: 0,
            sampler: SamplerConfig::default(),
            log_every: 100,
            noise_dim: GENERATOR_NOISE_DIM,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [("b_d", self.b_d), ("b_g", self.b_g), ("b_t", self.b_t)] {
            if v < 2 {
                return Err(Error::config(key, format!("batch size {v} must be at least 2")));
            }
        }
        for (key, v) in [("lr_G", self.lr_g), ("lr_GNN", self.lr_gnn)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("learning rate {v} must be positive")));
            }
        }
        if self.steps < 1 {
            return Err(Error::config("steps", "must be at least 1"));
        }
        if self.log_every < 1 {
            return Err(Error::config("log_every", "must be at least 1"));
        }
        if self.noise_dim < 1 {
            return Err(Error::config("noise_dim", "must be at least 1"));
        }
        Ok(())
    }
}

/// Outcome of one alternating step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub step: usize,
    /// CF loss at the sampler's proposal before its update.
    pub loss_t: f64,
    /// CF loss at the updated sampler's proposal, before the generator update.
    pub loss_g: f64,
    pub sampler_version_before: u64,
    /// Sampler version the generator gradient was computed against.
    pub sampler_version_for_generator: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    pub step: usize,
    pub loss_g: f64,
    pub loss_t: f64,
    pub wall_ms: f64,
}

/// Generator, sampler and both optimizers, plus the random streams that
/// drive noise and query points.
#[derive(Debug, Clone)]
pub struct Trainer {
    pub config: TrainConfig,
    pub generator: Mlp,
    pub sampler: SamplerParams,
    pub gen_opt: AdamState,
    pub sampler_opt: AdamState,
    noise_rng: SeededRng,
    points_rng: SeededRng,
    step: usize,
}

fn diverged(step: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::NonFinite { op } => Error::Diverged {
            step,
            detail: format!("non-finite value in {op}"),
        },
        other => other,
    }
}

impl Trainer {
    /// Fresh generator and sampler for data of width `m`.
    pub fn new(config: TrainConfig, m: usize) -> Result<Self> {
        config.validate()?;
        let generator = mlp_init(&generator_spec(config.noise_dim, m), config.seed);
        let sampler = SamplerParams::init(config.sampler, m, config.seed.wrapping_add(1))?;
        Ok(Self::from_parts(config, generator, sampler))
    }

    pub fn from_parts(config: TrainConfig, generator: Mlp, sampler: SamplerParams) -> Self {
        let gen_opt = AdamState::new(&generator.params);
        let sampler_opt = AdamState::new(&sampler.params);
        Trainer {
            noise_rng: seeded(config.seed, stream::NOISE),
            points_rng: seeded(config.seed, stream::BASE_POINTS),
            config,
            generator,
            sampler,
            gen_opt,
            sampler_opt,
            step: 0,
        }
    }

    pub fn data_dim(&self) -> usize {
        self.generator.spec.output_width()
    }

    pub fn steps_done(&self) -> usize {
        self.step
    }

    /// Draws `n` generated samples without gradient tracking.
    pub fn generate(&mut self, n: usize) -> Result<Tensor> {
        let z = gaussian_matrix(&mut self.noise_rng, n, self.config.noise_dim);
        self.generator.apply(&z)
    }

    /// Runs one full alternating step on a real minibatch (`b_d x m`).
    pub fn train_step(&mut self, real: &Tensor) -> Result<StepReport> {
        let step = self.step;
        let m = self.data_dim();
        if real.shape().len() != 2 || real.cols() != m {
            return Err(Error::shape("train_step", format!("real batch {:?}, data dim {m}", real.shape())));
        }
        let z = gaussian_matrix(&mut self.noise_rng, self.config.b_g, self.config.noise_dim);
        let fake = self.generator.apply(&z).map_err(diverged(step))?;
        let base = sample_base_points_with(&mut self.points_rng, self.config.b_t, m)?;
        let aug = observed_discrepancy(real, &fake, &base).map_err(diverged(step))?;

        let version_before = self.sampler.version();
        let loss_t = if self.sampler.kind() == SamplerKind::Gaussian {
            cf_loss_at(real, &fake, base.tensor()).map_err(diverged(step))?
        } else {
            let mut tape = Tape::new();
            let vars = self.sampler.params.bind(&mut tape);
            let x = tape.constant(real);
            let y = tape.constant(&fake);
            let t = propose(&mut tape, &aug, &self.sampler, &vars).map_err(diverged(step))?;
            let loss = cf_loss(&mut tape, x, y, t).map_err(diverged(step))?;
            let value = finite_loss(&tape, loss, step)?;
            let grads = tape.backward(loss).map_err(diverged(step))?;
            self.sampler.params.absorb_grads(&grads, &vars)?;
            adam_step(&mut self.sampler.params, &mut self.sampler_opt, self.config.lr_gnn, Direction::Ascent)?;
            self.sampler.bump_version();
            value
        };

        let version_for_generator = self.sampler.version();
        let mut tape = Tape::new();
        let svars = self.sampler.params.bind_constant(&mut tape);
        let gvars = self.generator.params.bind(&mut tape);
        let x = tape.constant(real);
        let zv = tape.constant(&z);
        let y = self.generator.forward(&mut tape, zv, &gvars).map_err(diverged(step))?;
        let t = propose(&mut tape, &aug, &self.sampler, &svars).map_err(diverged(step))?;
        let loss = cf_loss(&mut tape, x, y, t).map_err(diverged(step))?;
        let loss_g = finite_loss(&tape, loss, step)?;
        let grads = tape.backward(loss).map_err(diverged(step))?;
        self.generator.params.absorb_grads(&grads, &gvars)?;
        adam_step(&mut self.generator.params, &mut self.gen_opt, self.config.lr_g, Direction::Descent)?;

        self.step += 1;
        Ok(StepReport {
            step,
            loss_t,
            loss_g,
            sampler_version_before: version_before,
            sampler_version_for_generator: version_for_generator,
        })
    }

    /// Runs only the sampler half of a step (ascent) against a fixed
    /// real/fake pair and returns the loss before the update.
    pub fn sampler_ascent_step(&mut self, real: &Tensor, fake: &Tensor) -> Result<f64> {
        let step = self.step;
        let m = self.data_dim();
        let base = sample_base_points_with(&mut self.points_rng, self.config.b_t, m)?;
        let aug = observed_discrepancy(real, fake, &base)?;
        let mut tape = Tape::new();
        let vars = self.sampler.params.bind(&mut tape);
        let x = tape.constant(real);
        let y = tape.constant(fake);
        let t = propose(&mut tape, &aug, &self.sampler, &vars).map_err(diverged(step))?;
        let loss = cf_loss(&mut tape, x, y, t).map_err(diverged(step))?;
        let value = finite_loss(&tape, loss, step)?;
        if self.sampler.kind() != SamplerKind::Gaussian {
            let grads = tape.backward(loss)?;
            self.sampler.params.absorb_grads(&grads, &vars)?;
            adam_step(&mut self.sampler.params, &mut self.sampler_opt, self.config.lr_gnn, Direction::Ascent)?;
            self.sampler.bump_version();
        }
        self.step += 1;
        Ok(value)
    }
}

fn finite_loss(tape: &Tape, loss: Var, step: usize) -> Result<f64> {
    let v = tape.scalar(loss)?;
    if !v.is_finite() {
        return Err(Error::Diverged {
            step,
            detail: format!("loss is {v}"),
        });
    }
    Ok(v)
}

/// Query points augmented with the detached ECF discrepancy at each point.
pub fn observed_discrepancy(real: &Tensor, fake: &Tensor, points: &QueryPoints) -> Result<AugmentedPoints> {
    let mut tape = Tape::new();
    let x = tape.constant(real);
    let y = tape.constant(fake);
    let t = points.bind(&mut tape);
    let ex = ecf(&mut tape, x, t)?.read(&tape);
    let ey = ecf(&mut tape, y, t)?.read(&tape);
    augment_with_loss(points, &ex, &ey)
}

/// CF loss between two plain sample sets at plain points.
pub fn cf_loss_at(x: &Tensor, y: &Tensor, points: &Tensor) -> Result<f64> {
    let mut tape = Tape::new();
    let xv = tape.constant(x);
    let yv = tape.constant(y);
    let t = tape.constant(points);
    let l = cf_loss(&mut tape, xv, yv, t)?;
    tape.scalar(l)
}

/// Shuffled minibatches over a fixed dataset; reshuffles after each pass.
#[derive(Debug, Clone)]
pub struct Batcher {
    order: Vec<usize>,
    cursor: usize,
    rng: SeededRng,
}

impl Batcher {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut rng = seeded(seed, stream::SHUFFLE);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        Batcher { order, cursor: 0, rng }
    }

    pub fn next_indices(&mut self, b: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(b);
        while out.len() < b {
            if self.cursor == self.order.len() {
                self.order.shuffle(&mut self.rng);
                self.cursor = 0;
            }
            let take = (b - out.len()).min(self.order.len() - self.cursor);
            out.extend_from_slice(&self.order[self.cursor..self.cursor + take]);
            self.cursor += take;
        }
        out
    }
}

/// Result of [`train_loop`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub trainer: Trainer,
    pub metrics: Vec<MetricsRow>,
    pub reports: Vec<StepReport>,
}

/// Runs `config.steps` alternating steps over shuffled minibatches of
/// `data`, logging a metrics row at every step divisible by `log_every`.
///
/// `on_log` runs after each logged step with the trainer in its post-step
/// state; it may compute extra evaluation metrics.
pub fn train_loop<F>(data: &Tensor, config: TrainConfig, mut on_log: F) -> Result<TrainOutcome>
where
    F: FnMut(&mut Trainer, &MetricsRow) -> Result<()>,
{
    config.validate()?;
    if data.shape().len() != 2 || data.rows() < 2 {
        return Err(Error::shape("train_loop", format!("dataset shape {:?}", data.shape())));
    }
    let trainer = Trainer::new(config, data.cols())?;
    train_loop_with(data, trainer, &mut on_log)
}

/// [`train_loop`] starting from an existing trainer.
pub fn train_loop_with<F>(data: &Tensor, mut trainer: Trainer, on_log: &mut F) -> Result<TrainOutcome>
where
    F: FnMut(&mut Trainer, &MetricsRow) -> Result<()>,
{
    let config = trainer.config.clone();
    let mut batcher = Batcher::new(data.rows(), config.seed);
    let start = Instant::now();
    let mut metrics = Vec::new();
    let mut reports = Vec::with_capacity(config.steps);
    for step in 0..config.steps {
        let batch = data.select_rows(&batcher.next_indices(config.b_d));
        let report = trainer.train_step(&batch)?;
        reports.push(report);
        if step % config.log_every == 0 {
            let row = MetricsRow {
                step,
                loss_g: report.loss_g,
                loss_t: report.loss_t,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            };
            on_log(&mut trainer, &row)?;
            metrics.push(row);
        }
    }
    Ok(TrainOutcome {
        trainer,
        metrics,
        reports,
    })
}
