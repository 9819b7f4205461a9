use std::f64::consts::PI;

use cfmatch::experiments::poc::{run_poc, PocConfig};
use cfmatch::rng::seeded;
use cfmatch::samplers::SamplerKind;
use rand::Rng;
use rand_distr::StandardNormal;

/// Summed log-density of 64 standard normal points under one random
/// surface, drawn from scratch without the library's surface generator.
fn monte_carlo_draw(rng: &mut impl Rng) -> f64 {
    let mu = [rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0)];
    let l1: f64 = rng.random_range(0.1..=2.0);
    let l2: f64 = rng.random_range(0.1..=2.0);
    let th: f64 = rng.random_range(0.0..PI);
    let (s, c) = th.sin_cos();
    let mut total = 0.0;
    for _ in 0..64 {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        // Coordinates in the eigenbasis of the covariance.
        let (dx, dy) = (x - mu[0], y - mu[1]);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        total += -(2.0 * PI).ln() - 0.5 * (l1 * l2).ln() - 0.5 * (u * u / l1 + v * v / l2);
    }
    total
}

#[test]
fn gaussian_kind_matches_monte_carlo_band() {
    let mut rng = seeded(2024, 99);
    let draws: Vec<f64> = (0..10_000).map(|_| monte_carlo_draw(&mut rng)).collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64).sqrt();

    let config = PocConfig::default();
    let (r, _) = run_poc(SamplerKind::Gaussian, &config).unwrap();
    // Both the oracle mean and the 1000-surface mean carry sampling error.
    let band = 4.0 * sd * (1.0 / 1000.0 + 1.0 / 10_000.0f64).sqrt();
    assert!((r.mean_ll - mean).abs() < band, "{} vs oracle {mean} ± {band}", r.mean_ll);
    assert!((r.std_ll / sd - 1.0).abs() < 0.25, "std {} vs oracle {sd}", r.std_ll);
}

#[test]
fn learned_sampler_beats_gaussian_quickly() {
    let config = PocConfig {
        train_surfaces: 200,
        test_surfaces: 200,
        steps: 1000,
        ..PocConfig::default()
    };
    let (gauss, _) = run_poc(SamplerKind::Gaussian, &config).unwrap();
    let (mlp, _) = run_poc(SamplerKind::Mlp, &config).unwrap();
    assert!(mlp.mean_ll > gauss.mean_ll, "{} vs {}", mlp.mean_ll, gauss.mean_ll);
}
