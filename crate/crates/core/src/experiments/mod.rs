//! Experiment drivers and evaluation metrics.

pub mod latent;
pub mod metrics;
pub mod poc;
pub mod toy;

pub use latent::{pretrain_autoencoder, run_latent_experiment, AeConfig, LatentConfig, LatentOutcome, LatentRow};
pub use metrics::{energy_distance, mode_coverage};
pub use poc::{gen_poc_surfaces, poc_log_likelihood, run_poc, PocChannel, PocConfig, PocResult, PocSurface};
pub use toy::{make_toy_dataset, ring8_centers, run_toy, ToyKind, ToyOutcome, ToyRunConfig, ToySpec};
