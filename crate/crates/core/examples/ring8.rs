//! Trains a generator on the eight-mode ring with the chosen sampler and
//! reports mode coverage and energy distance to held-out rows.
//!
//! ```text
//! cargo run --release --example ring8 -- [gaussian|mlp|gnn] [steps] [seed]
//! ```

use std::time::Instant;

use cfmatch::experiments::{run_toy, ToyRunConfig};
use cfmatch::samplers::{SamplerConfig, SamplerKind};

fn main() -> cfmatch::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: SamplerKind = args.next().as_deref().unwrap_or("gnn").parse()?;
    let steps = args.next().and_then(|s| s.parse().ok()).unwrap_or(5000);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let mut config = ToyRunConfig::default();
    config.train.steps = steps;
    config.train.seed = seed;
    config.train.sampler = SamplerConfig::with_kind(kind);
    config.train.log_every = (steps / 10).max(1);

    let start = Instant::now();
    let out = run_toy(&config)?;
    for row in &out.metrics {
        println!("step {:>5}  loss_g {:.4}  loss_t {:.4}", row.step, row.loss_g, row.loss_t);
    }
    println!(
        "{kind}: coverage {}/8, energy distance {:.4}, {:.1}s",
        out.coverage.unwrap_or(0),
        out.energy,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
