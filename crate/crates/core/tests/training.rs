use cfmatch::autodiff::Tensor;
use cfmatch::experiments::toy::{make_toy_dataset, ToySpec};
use cfmatch::params::ParamSet;
use cfmatch::rng::{gaussian_matrix, seeded};
use cfmatch::samplers::{propose_points, sample_base_points, SamplerConfig, SamplerKind};
use cfmatch::training::{adam_step, cf_loss_at, observed_discrepancy, train_loop, AdamState, Direction, TrainConfig, Trainer};
use proptest::prelude::*;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    0.5 * (v[(n - 1) / 2] + v[n / 2])
}

/// Loss the sampler achieves on a fixed evaluation set of base points.
fn sampler_loss(trainer: &Trainer, real: &Tensor, fake: &Tensor) -> f64 {
    let base = sample_base_points(64, real.cols(), 12345).unwrap();
    let aug = observed_discrepancy(real, fake, &base).unwrap();
    let pts = propose_points(&aug, &trainer.sampler).unwrap();
    cf_loss_at(real, fake, pts.tensor()).unwrap()
}

#[test]
fn ascent_does_not_lower_sampler_loss() {
    let mut gains = Vec::new();
    for seed in 0..20 {
        let real = make_toy_dataset(&ToySpec::ring8(256, seed)).unwrap();
        let config = TrainConfig {
            seed,
            ..TrainConfig::default()
        };
        let mut trainer = Trainer::new(config, 2).unwrap();
        let fake = trainer.generate(256).unwrap();
        let gen_before = trainer.generator.params.flat_values();
        let before = sampler_loss(&trainer, &real, &fake);
        for _ in 0..50 {
            trainer.sampler_ascent_step(&real, &fake).unwrap();
        }
        assert_eq!(trainer.generator.params.flat_values(), gen_before);
        gains.push(sampler_loss(&trainer, &real, &fake) - before);
    }
    assert!(median(gains.clone()) >= 0.0, "{gains:?}");
}

#[test]
fn loss_traces_finite_for_every_kind() {
    for spec in [ToySpec::ring8(2000, 1), ToySpec::manifold32(2000, 1)] {
        let data = make_toy_dataset(&spec).unwrap();
        for kind in SamplerKind::ALL {
            let config = TrainConfig {
                steps: 30,
                log_every: 1,
                sampler: SamplerConfig::with_kind(kind),
                ..TrainConfig::default()
            };
            let out = train_loop(&data, config, |_, _| Ok(())).unwrap();
            assert_eq!(out.metrics.len(), 30);
            assert!(out
                .reports
                .iter()
                .all(|r| r.loss_g.is_finite() && r.loss_t.is_finite()));
        }
    }
}

#[test]
fn identical_runs_give_identical_traces() {
    let data = make_toy_dataset(&ToySpec::ring8(1000, 3)).unwrap();
    let config = TrainConfig {
        steps: 20,
        log_every: 1,
        seed: 3,
        ..TrainConfig::default()
    };
    let a = train_loop(&data, config.clone(), |_, _| Ok(())).unwrap();
    let b = train_loop(&data, config, |_, _| Ok(())).unwrap();
    assert_eq!(a.reports, b.reports);
    assert_eq!(a.trainer.generator, b.trainer.generator);
}

#[test]
fn ring8_generator_loss_drops() {
    let data = make_toy_dataset(&ToySpec::ring8(10_000, 0)).unwrap();
    let config = TrainConfig {
        steps: 2001,
        log_every: 1,
        ..TrainConfig::default()
    };
    let out = train_loop(&data, config, |_, _| Ok(())).unwrap();
    let first = out.reports[0].loss_g;
    let last = out.reports[2000].loss_g;
    assert!(last < 0.3 * first, "loss at step 2000 {last} vs step 0 {first}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// With gradients of fixed magnitude the bias-corrected second moment
    /// equals g², so no coordinate can move more than `lr` per step.
    #[test]
    fn adam_step_is_bounded_by_lr(
        mags in prop::collection::vec(1e-4f64..1e3, 1..6),
        signs in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 1..40),
        lr in 1e-5f64..1e-1,
    ) {
        let mut p = ParamSet::new();
        p.push("w", Tensor::zeros(vec![mags.len()]));
        let mut state = AdamState::new(&p);
        for (step, s) in signs.iter().enumerate() {
            let g: Vec<f64> = mags.iter().zip(s).map(|(m, pos)| if *pos { *m } else { -*m }).collect();
            p.get_mut("w").unwrap().set_grad(&g).unwrap();
            let before = p.get("w").unwrap().values().to_vec();
            adam_step(&mut p, &mut state, lr, Direction::Descent).unwrap();
            prop_assert_eq!(state.step_count(), step as u64 + 1);
            for (a, b) in before.iter().zip(p.get("w").unwrap().values()) {
                prop_assert!((a - b).abs() <= lr * (1.0 + 1e-9));
            }
        }
    }
}

#[test]
fn generator_batch_rows_independent() {
    let trainer = Trainer::new(TrainConfig::default(), 3).unwrap();
    let z = gaussian_matrix(&mut seeded(4, 4), 64, 16);
    let all = trainer.generator.apply(&z).unwrap();
    let one = trainer.generator.apply(&z.select_rows(&[0])).unwrap();
    assert_eq!(one.values(), all.row(0));
}
