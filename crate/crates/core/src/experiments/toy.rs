use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::experiments::metrics::{energy_distance, mode_coverage};
use crate::rng::{gaussian_matrix, normal, seeded, stream};
use crate::training::{train_loop, MetricsRow, TrainConfig, Trainer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToyKind {
    /// Eight Gaussian modes equally spaced on the unit circle in `R^2`.
    Ring8,
    /// Three-mode warped 2-D manifold embedded in `R^32`.
    Manifold32,
}

impl FromStr for ToyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ring8" => Ok(ToyKind::Ring8),
            "manifold32" => Ok(ToyKind::Manifold32),
            other => Err(Error::config("dataset", format!("unknown dataset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToySpec {
    pub kind: ToyKind,
    pub n: usize,
    pub noise: f64,
    pub seed: u64,
}

impl ToySpec {
    pub fn ring8(n: usize, seed: u64) -> Self {
        ToySpec {
            kind: ToyKind::Ring8,
            n,
            noise: 0.05,
            seed,
        }
    }

    pub fn manifold32(n: usize, seed: u64) -> Self {
        ToySpec {
            kind: ToyKind::Manifold32,
            n,
            noise: 0.05,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            ToyKind::Ring8 => 2,
            ToyKind::Manifold32 => MANIFOLD_DIM,
        }
    }
}

pub const RING_MODES: usize = 8;
pub const MANIFOLD_DIM: usize = 32;
const MANIFOLD_MODES: usize = 3;
/// Fixed seed for the manifold's embedding; sample draws use the dataset seed.
const MANIFOLD_GEOMETRY_SEED: u64 = 0x00c0_ffee;

/// Mode centres of `ring8`: angle `2πk/8`, radius 1.
pub fn ring8_centers() -> Vec<Vec<f64>> {
    (0..RING_MODES)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / RING_MODES as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

/// Dataset plus the mixture component each row was drawn from.
pub fn make_toy_dataset_labeled(spec: &ToySpec) -> Result<(Tensor, Vec<usize>)> {
    if spec.n == 0 {
        return Err(Error::Contract("dataset size must be positive".into()));
    }
    if !(spec.noise >= 0.0 && spec.noise.is_finite()) {
        return Err(Error::config("noise", format!("{} is not a valid noise scale", spec.noise)));
    }
    let mut rng = seeded(spec.seed, stream::DATA);
    match spec.kind {
        ToyKind::Ring8 => {
            let centers = ring8_centers();
            let mut values = Vec::with_capacity(spec.n * 2);
            let mut labels = Vec::with_capacity(spec.n);
            for _ in 0..spec.n {
                let k = rng.random_range(0..RING_MODES);
                values.push(centers[k][0] + spec.noise * normal(&mut rng));
                values.push(centers[k][1] + spec.noise * normal(&mut rng));
                labels.push(k);
            }
            Ok((Tensor::new(vec![spec.n, 2], values)?, labels))
        }
        ToyKind::Manifold32 => {
            let geometry = ManifoldGeometry::new();
            let mut values = Vec::with_capacity(spec.n * MANIFOLD_DIM);
            let mut labels = Vec::with_capacity(spec.n);
            for _ in 0..spec.n {
                let k = rng.random_range(0..MANIFOLD_MODES);
                let c = &geometry.centers[k];
                let u = [c[0] + 0.35 * normal(&mut rng), c[1] + 0.35 * normal(&mut rng)];
                for j in 0..MANIFOLD_DIM {
                    let w = &geometry.freqs[j];
                    let x = (w[0] * u[0] + w[1] * u[1] + geometry.phases[j]).sin();
                    values.push(x + spec.noise * normal(&mut rng));
                }
                labels.push(k);
            }
            Ok((Tensor::new(vec![spec.n, MANIFOLD_DIM], values)?, labels))
        }
    }
}

/// Generates the dataset described by `spec`, deterministic per seed.
pub fn make_toy_dataset(spec: &ToySpec) -> Result<Tensor> {
    make_toy_dataset_labeled(spec).map(|(x, _)| x)
}

/// Two intrinsic coordinates around one of three centres, pushed through
/// 32 sinusoids `x_j = sin(ω_j·u + φ_j)`.
struct ManifoldGeometry {
    centers: Vec<[f64; 2]>,
    freqs: Vec<[f64; 2]>,
    phases: Vec<f64>,
}

impl ManifoldGeometry {
    fn new() -> Self {
        let mut rng = seeded(MANIFOLD_GEOMETRY_SEED, stream::DATA);
        let centers = (0..MANIFOLD_MODES)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / MANIFOLD_MODES as f64;
                [1.5 * a.cos(), 1.5 * a.sin()]
            })
            .collect();
        let freqs = (0..MANIFOLD_DIM)
            .map(|_| [normal(&mut rng), normal(&mut rng)])
            .collect();
        let phases = (0..MANIFOLD_DIM)
            .map(|_| rng.random_range(0.0..2.0 * PI))
            .collect();
        ManifoldGeometry {
            centers,
            freqs,
            phases,
        }
    }
}

/// Radius around each ring centre used for mode coverage.
pub const COVERAGE_RADIUS: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct ToyRunConfig {
    pub dataset: ToyKind,
    /// Training rows.
    pub n: usize,
    /// Extra rows drawn from the same distribution for evaluation.
    pub holdout: usize,
    /// Generated samples used for the final evaluation.
    pub eval_samples: usize,
    pub train: TrainConfig,
}

impl Default for ToyRunConfig {
    fn default() -> Self {
        ToyRunConfig {
            dataset: ToyKind::Ring8,
            n: 10_000,
            holdout: 2000,
            eval_samples: 2000,
            train: TrainConfig {
                steps: 5000,
                ..TrainConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct ToyOutcome {
    pub metrics: Vec<MetricsRow>,
    pub trainer: Trainer,
    /// Final generated samples, from fixed evaluation noise.
    pub samples: Tensor,
    /// Energy distance between `samples` and the held-out rows.
    pub energy: f64,
    /// Covered ring modes; only for `ring8`.
    pub coverage: Option<usize>,
}

/// Draws `n + holdout` rows, trains on the first `n` and evaluates the
/// final generator against the rest.
pub fn run_toy(config: &ToyRunConfig) -> Result<ToyOutcome> {
    if config.holdout < 2 || config.eval_samples < 2 {
        return Err(Error::config("holdout", "evaluation sets need at least two rows"));
    }
    let seed = config.train.seed;
    let spec = ToySpec {
        n: config.n + config.holdout,
        ..match config.dataset {
            ToyKind::Ring8 => ToySpec::ring8(0, seed),
            ToyKind::Manifold32 => ToySpec::manifold32(0, seed),
        }
    };
    let all = make_toy_dataset(&spec)?;
    let train = all.select_rows(&(0..config.n).collect::<Vec<_>>());
    let heldout = all.select_rows(&(config.n..all.rows()).collect::<Vec<_>>());
    let outcome = train_loop(&train, config.train.clone(), |_, _| Ok(()))?;
    let noise = gaussian_matrix(&mut seeded(seed, stream::EVAL), config.eval_samples, config.train.noise_dim);
    let samples = outcome.trainer.generator.apply(&noise)?;
    let energy = energy_distance(&samples, &heldout)?;
    let coverage = match config.dataset {
        ToyKind::Ring8 => Some(mode_coverage(&samples, &ring8_centers(), COVERAGE_RADIUS)?),
        ToyKind::Manifold32 => None,
    };
    Ok(ToyOutcome {
        metrics: outcome.metrics,
        trainer: outcome.trainer,
        samples,
        energy,
        coverage,
    })
}
