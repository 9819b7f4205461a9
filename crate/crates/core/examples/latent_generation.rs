//! Pre-trains an autoencoder on the 32-dimensional manifold, freezes it and
//! trains a generator in its latent space.
//!
//! ```text
//! cargo run --release --example latent_generation -- [gaussian|mlp|gnn] [steps] [seed]
//! ```

use cfmatch::experiments::latent::{latent_dataset, pretrain_autoencoder, run_latent_experiment, AeConfig, LatentConfig};
use cfmatch::samplers::{SamplerConfig, SamplerKind};

fn main() -> cfmatch::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: SamplerKind = args.next().as_deref().unwrap_or("gnn").parse()?;
    let steps = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let data = latent_dataset(10_000)?;
    let (mut ae, mse) = pretrain_autoencoder(&data, &AeConfig::default())?;
    println!("autoencoder reconstruction MSE {mse:.4}");
    ae.freeze();

    let mut config = LatentConfig::default();
    config.train.steps = steps;
    config.train.seed = seed;
    config.train.log_every = (steps / 10).max(1);
    config.train.sampler = SamplerConfig::with_kind(kind);
    let out = run_latent_experiment(&ae, &data, &config)?;
    println!("step   cf_loss   energy(latent)   energy(data)");
    for r in &out.trace {
        println!("{:>5}  {:.5}   {:.5}          {:.5}", r.step, r.cf_loss, r.energy_latent, r.energy_data);
    }
    println!("autoencoder untouched: {}", out.ae_unchanged);
    Ok(())
}
