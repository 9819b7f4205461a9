//! Worst-case region benchmark: trains MLP and GNN samplers on random
//! Gaussian surfaces and compares the log-likelihood of their proposals
//! with untouched Gaussian points on held-out surfaces.
//!
//! ```text
//! cargo run --release --example poc_benchmark -- [steps] [seed]
//! ```

use std::time::Instant;

use cfmatch::experiments::{run_poc, PocConfig};
use cfmatch::samplers::SamplerKind;

fn main() -> cfmatch::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps = args.next().and_then(|s| s.parse().ok()).unwrap_or(PocConfig::default().steps);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let config = PocConfig {
        steps,
        seed,
        ..PocConfig::default()
    };
    println!("method,mean_ll,std_ll,seconds");
    for kind in SamplerKind::ALL {
        let start = Instant::now();
        let (result, _) = run_poc(kind, &config)?;
        println!("{kind},{:.3},{:.3},{:.1}", result.mean_ll, result.std_ll, start.elapsed().as_secs_f64());
    }
    Ok(())
}
