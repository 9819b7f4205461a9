//! Builds the k-nearest-neighbour graph over Gaussian query points and
//! shows how each sampler kind proposes updated points.
//!
//! ```text
//! cargo run --release --example samplers
//! ```

use cfmatch::rng::{gaussian_matrix, seeded};
use cfmatch::samplers::{build_knn_graph, propose_points, sample_base_points, SamplerConfig, SamplerKind, SamplerParams};
use cfmatch::training::observed_discrepancy;

fn main() -> cfmatch::Result<()> {
    let base = sample_base_points(16, 2, 3)?;
    let graph = build_knn_graph(&base, 4)?;
    for i in 0..4 {
        println!("node {i:>2} neighbours {:?}", graph.neighbors(i));
    }

    // The augmentation channel is the observed ECF discrepancy per point.
    let real = gaussian_matrix(&mut seeded(0, 10), 512, 2);
    let mut fake = gaussian_matrix(&mut seeded(1, 10), 512, 2);
    fake.values_mut().iter_mut().for_each(|v| *v *= 0.5);
    let aug = observed_discrepancy(&real, &fake, &base)?;

    for kind in SamplerKind::ALL {
        let sampler = SamplerParams::init(SamplerConfig::with_kind(kind), 2, 7)?;
        let out = propose_points(&aug, &sampler)?;
        println!("\n{kind} sampler ({} parameters)", sampler.params.num_scalars());
        for i in 0..4 {
            let (t, u) = (base.point(i), out.point(i));
            println!(
                "  ({:>6.3}, {:>6.3}) -> ({:>6.3}, {:>6.3})   ratio ({:.3}, {:.3})",
                t[0], t[1], u[0], u[1], u[0] / t[0], u[1] / t[1]
            );
        }
    }
    Ok(())
}
