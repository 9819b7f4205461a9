//! Worst-case region benchmark on synthetic discrepancy surfaces.
//!
//! Each surface is a 2-D Gaussian density standing in for an ECF
//! discrepancy landscape. A sampler sees standard Gaussian base points
//! augmented with the (batch-relative) density at each point and must move them to where
//! the density is high. Proposals are scored by the summed log-density of
//! the proposed points on held-out surfaces.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::cf::QueryPoints;
use crate::error::{Error, Result};
use crate::linalg::{spd_inverse_logdet, Matrix};
use crate::rng::{seeded, stream};
use crate::samplers::{propose, propose_points, sample_base_points_with, AugmentedPoints, SamplerConfig, SamplerKind, SamplerParams};
use crate::training::{adam_step, AdamState, Direction};

pub const POC_DIM: usize = 2;

/// One Gaussian density on `R^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PocSurface {
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
    precision: [[f64; 2]; 2],
    logdet: f64,
}

impl PocSurface {
    pub fn new(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Result<Self> {
        let m: Matrix = cov.iter().map(|r| r.to_vec()).collect();
        let (inv, logdet) = spd_inverse_logdet(&m)?;
        Ok(PocSurface {
            mean,
            cov,
            precision: [[inv[0][0], inv[0][1]], [inv[1][0], inv[1][1]]],
            logdet,
        })
    }

    /// Eigenvalues of the covariance, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let [[a, b], [_, d]] = self.cov;
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mid - rad, mid + rad]
    }

    fn log_norm(&self) -> f64 {
        -(2.0 * PI).ln() - 0.5 * self.logdet
    }

    pub fn log_density(&self, t: &[f64]) -> f64 {
        let d = [t[0] - self.mean[0], t[1] - self.mean[1]];
        let p = &self.precision;
        let q = d[0] * (p[0][0] * d[0] + p[0][1] * d[1]) + d[1] * (p[1][0] * d[0] + p[1][1] * d[1]);
        self.log_norm() - 0.5 * q
    }

    pub fn density(&self, t: &[f64]) -> f64 {
        self.log_density(t).exp()
    }
}

/// `count` random surfaces: means uniform on `[−3, 3]²`, covariances
/// `R diag(λ1, λ2) Rᵀ` with a uniform random rotation and eigenvalues
/// uniform on `[0.1, 2.0]`.
pub fn gen_poc_surfaces(count: usize, seed: u64) -> Result<Vec<PocSurface>> {
    if count == 0 {
        return Err(Error::Contract("surface count must be positive".into()));
    }
    let mut rng = seeded(seed, stream::SURFACES);
    (0..count)
        .map(|_| {
            let mean = [rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0)];
            let l1: f64 = rng.random_range(0.1..=2.0);
            let l2: f64 = rng.random_range(0.1..=2.0);
            let theta: f64 = rng.random_range(0.0..PI);
            let (s, c) = theta.sin_cos();
            let a = l1 * c * c + l2 * s * s;
            let b = (l1 - l2) * c * s;
            let d = l1 * s * s + l2 * c * c;
            PocSurface::new(mean, [[a, b], [b, d]])
        })
        .collect()
}

/// Sum over points of the surface's log-density.
pub fn poc_log_likelihood(points: &QueryPoints, surface: &PocSurface) -> Result<f64> {
    if points.dim() != POC_DIM {
        return Err(Error::shape("poc_log_likelihood", format!("points of dim {}", points.dim())));
    }
    Ok((0..points.count()).map(|i| surface.log_density(points.point(i))).sum())
}

/// Differentiable summed log-density of `points` (`b x 2`) on the tape.
fn log_likelihood_on_tape(tape: &mut Tape, points: Var, surface: &PocSurface) -> Result<Var> {
    let n = tape.shape(points)[0];
    let mean = tape.input(vec![POC_DIM], surface.mean.to_vec(), false)?;
    let p = &surface.precision;
    let prec = tape.input(vec![2, 2], vec![p[0][0], p[0][1], p[1][0], p[1][1]], false)?;
    let d = tape.sub(points, mean)?;
    let dp = tape.matmul(d, prec)?;
    let q = tape.mul(dp, d)?;
    let q = tape.sum(q)?;
    let ll = tape.scale(q, -0.5)?;
    tape.add_scalar(ll, n as f64 * surface.log_norm())
}

/// What the sampler's augmentation column carries for a surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PocChannel {
    /// The density value at each point.
    Density,
    /// The density divided by its maximum over the batch of points.
    Relative,
}

/// Base points augmented with the surface density at each point. Far from
/// a narrow surface the raw density underflows toward zero everywhere in
/// the batch, so by default it is rescaled by the batch maximum.
pub fn surface_augmented(points: &QueryPoints, surface: &PocSurface, channel: PocChannel) -> Result<AugmentedPoints> {
    let mut values: Vec<f64> = (0..points.count()).map(|i| surface.density(points.point(i))).collect();
    if channel == PocChannel::Relative {
        let max = values.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            values.iter_mut().for_each(|v| *v /= max);
        }
    }
    AugmentedPoints::new(points, &values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PocConfig {
    pub train_surfaces: usize,
    pub test_surfaces: usize,
    pub b_t: usize,
    /// Sampler training steps (one surface per step).
    pub steps: usize,
    pub lr: f64,
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub channel: PocChannel,
}

impl Default for PocConfig {
    fn default() -> Self {
        PocConfig {
            train_surfaces: 1000,
            test_surfaces: 1000,
            b_t: 64,
            steps: 10_000,
            lr: 3e-4,
            seed: 0,
            sampler: SamplerConfig::default(),
            channel: PocChannel::Relative,
        }
    }
}

impl PocConfig {
    pub fn train_seed(&self) -> u64 {
        self.seed.wrapping_mul(2)
    }

    pub fn test_seed(&self) -> u64 {
        self.seed.wrapping_mul(2).wrapping_add(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PocResult {
    pub method: SamplerKind,
    pub mean_ll: f64,
    pub std_ll: f64,
    /// Per-surface log-likelihoods on the test set.
    pub per_surface: Vec<f64>,
}

/// Trains a learned sampler by gradient ascent on the summed
/// log-likelihood of its proposals, one random training surface per step.
/// Gaussian samplers are returned untrained.
pub fn train_poc_sampler(kind: SamplerKind, config: &PocConfig, surfaces: &[PocSurface]) -> Result<SamplerParams> {
    let sampler_config = SamplerConfig {
        kind,
        ..config.sampler
    };
    let mut params = SamplerParams::init(sampler_config, POC_DIM, config.seed.wrapping_add(17))?;
    if kind == SamplerKind::Gaussian {
        return Ok(params);
    }
    let mut opt = AdamState::new(&params.params);
    let mut rng = seeded(config.train_seed(), stream::BASE_POINTS);
    for step in 0..config.steps {
        let surface = &surfaces[rng.random_range(0..surfaces.len())];
        let base = sample_base_points_with(&mut rng, config.b_t, POC_DIM)?;
        let aug = surface_augmented(&base, surface, config.channel)?;
        let mut tape = Tape::new();
        let vars = params.params.bind(&mut tape);
        let out = propose(&mut tape, &aug, &params, &vars)?;
        let ll = log_likelihood_on_tape(&mut tape, out, surface)?;
        if !tape.scalar(ll)?.is_finite() {
            return Err(Error::Diverged {
                step,
                detail: "non-finite log-likelihood".into(),
            });
        }
        let grads = tape.backward(ll)?;
        params.params.absorb_grads(&grads, &vars)?;
        adam_step(&mut params.params, &mut opt, config.lr, Direction::Ascent)?;
        params.bump_version();
    }
    Ok(params)
}

/// Scores a sampler on held-out surfaces. Base points come from a fixed
/// evaluation stream, so every method sees the same inputs.
pub fn evaluate_poc(params: &SamplerParams, config: &PocConfig, surfaces: &[PocSurface]) -> Result<PocResult> {
    let mut rng = seeded(config.test_seed(), stream::EVAL);
    let mut per_surface = Vec::with_capacity(surfaces.len());
    for surface in surfaces {
        let base = sample_base_points_with(&mut rng, config.b_t, POC_DIM)?;
        let aug = surface_augmented(&base, surface, config.channel)?;
        let out = propose_points(&aug, params)?;
        per_surface.push(poc_log_likelihood(&out, surface)?);
    }
    let n = per_surface.len() as f64;
    let mean_ll = per_surface.iter().sum::<f64>() / n;
    let var = per_surface.iter().map(|v| (v - mean_ll).powi(2)).sum::<f64>() / n;
    Ok(PocResult {
        method: params.kind(),
        mean_ll,
        std_ll: var.sqrt(),
        per_surface,
    })
}

/// Trains (if needed) and evaluates one method end to end.
pub fn run_poc(kind: SamplerKind, config: &PocConfig) -> Result<(PocResult, SamplerParams)> {
    let train = gen_poc_surfaces(config.train_surfaces, config.train_seed())?;
    let test = gen_poc_surfaces(config.test_surfaces, config.test_seed())?;
    let params = train_poc_sampler(kind, config, &train)?;
    Ok((evaluate_poc(&params, config, &test)?, params))
}

/// Converts a surface's base points to a tensor for plotting.
pub fn surface_grid(surface: &PocSurface, half_width: f64, steps: usize) -> Tensor {
    let mut values = Vec::with_capacity(steps * steps * 3);
    for i in 0..steps {
        for j in 0..steps {
            let x = -half_width + 2.0 * half_width * i as f64 / (steps - 1).max(1) as f64;
            let y = -half_width + 2.0 * half_width * j as f64 / (steps - 1).max(1) as f64;
            values.extend_from_slice(&[x, y, surface.density(&[x, y])]);
        }
    }
    Tensor::new(vec![steps * steps, 3], values).expect("finite densities")
}
