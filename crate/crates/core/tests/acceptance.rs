//! Acceptance suite. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails or exceeds its time budget.
//!
//! Criteria run one after another inside a single test so that their wall
//! times are not distorted by other tests sharing the CPU.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use cfmatch::autodiff::{Tape, Tensor};
use cfmatch::cf::{cf_loss, cf_loss_decomposed, cf_quadratic, ecf, ComplexGrid, ComplexValues, QueryPoints};
use cfmatch::cli::{run, Command, RunConfig};
use cfmatch::experiments::latent::{latent_dataset, pretrain_autoencoder, run_latent_experiment, AeConfig, LatentConfig};
use cfmatch::experiments::poc::{run_poc, PocConfig};
use cfmatch::experiments::toy::{run_toy, ToyRunConfig};
use cfmatch::nets::{generator_spec, mlp_init, Mlp};
use cfmatch::rng::{gaussian_matrix, seeded};
use cfmatch::samplers::{build_knn_graph, propose, propose_points, sample_base_points, AugmentedPoints, SamplerConfig, SamplerKind, SamplerParams};
use cfmatch::training::observed_discrepancy;
use rand::Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn run_criterion(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let result = f();
    let took = start.elapsed();
    let result = match result {
        Ok(detail) if took > budget => Err(format!("{detail}; took {took:.1?}, budget {budget:?}")),
        other => other,
    };
    match &result {
        Ok(detail) => println!("PASS {id} {name}: {detail} ({took:.2?})"),
        Err(detail) => println!("FAIL {id} {name}: {detail} ({took:.2?})"),
    }
    result.is_ok()
}

// 1 ------------------------------------------------------------------------

fn random_ecf(rng: &mut impl Rng, points: usize) -> ComplexValues {
    if rng.random_bool(0.5) {
        // ECF of a small random sample.
        let n = rng.random_range(1..20);
        let m = 2;
        let xs: Vec<f64> = (0..n * m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let ts: Vec<f64> = (0..points * m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut re = vec![0.0; points];
        let mut im = vec![0.0; points];
        for p in 0..points {
            for i in 0..n {
                let a = ts[p * m] * xs[i * m] + ts[p * m + 1] * xs[i * m + 1];
                re[p] += a.cos() / n as f64;
                im[p] += a.sin() / n as f64;
            }
        }
        ComplexValues { re, im }
    } else {
        // Arbitrary points of the closed unit disc, including the origin.
        let (re, im) = (0..points)
            .map(|_| {
                if rng.random_bool(0.05) {
                    (0.0, 0.0)
                } else {
                    let r: f64 = rng.random_range(0.0..=1.0);
                    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    (r * a.cos(), r * a.sin())
                }
            })
            .unzip();
        ComplexValues { re, im }
    }
}

fn decomposition_identity() -> Check {
    let mut rng = seeded(101, 0);
    let points = 16;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let x = random_ecf(&mut rng, points);
        let y = random_ecf(&mut rng, points);
        let mut tape = Tape::new();
        let gx = ComplexGrid::constant(&mut tape, &x).map_err(|e| e.to_string())?;
        let gy = ComplexGrid::constant(&mut tape, &y).map_err(|e| e.to_string())?;
        let (amp, phase) = cf_loss_decomposed(&mut tape, &gx, &gy).map_err(|e| e.to_string())?;
        let quad = cf_quadratic(&mut tape, &gx, &gy).map_err(|e| e.to_string())?;
        for p in 0..points {
            let oracle = (x.re[p] - y.re[p]).powi(2) + (x.im[p] - y.im[p]).powi(2);
            let sum = tape.value(amp)[p] + tape.value(phase)[p];
            worst = worst.max((sum - oracle).abs()).max((tape.value(quad)[p] - oracle).abs());
        }
    }
    ensure(worst < 1e-9, format!("max |amp + phase - quadratic| = {worst:e}"))?;
    Ok(format!("max deviation {worst:.2e} over 16 000 points"))
}

// 2 ------------------------------------------------------------------------

fn ecf_error(samples: &Tensor, points: &QueryPoints) -> Result<f64, String> {
    let mut tape = Tape::new();
    let x = tape.constant(samples);
    let t = points.bind(&mut tape);
    let e = ecf(&mut tape, x, t).map_err(|e| e.to_string())?.read(&tape);
    Ok((0..points.count())
        .map(|p| {
            // Closed form for N(0, I): real and equal to exp(-|t|^2 / 2).
            let t = points.point(p);
            let cf = (-0.5 * t.iter().map(|v| v * v).sum::<f64>()).exp();
            (e.re[p] - cf).hypot(e.im[p])
        })
        .fold(0.0, f64::max))
}

fn ecf_oracle() -> Check {
    let points = sample_base_points(64, 2, 77).map_err(|e| e.to_string())?;
    let big = gaussian_matrix(&mut seeded(5, 0), 100_000, 2);
    let err = ecf_error(&big, &points)?;
    ensure(err < 0.02, format!("n=1e5 max error {err:.4} >= 0.02"))?;
    let mut avgs = Vec::new();
    for n in [100, 1000, 10_000] {
        let mut total = 0.0;
        for s in 0..20 {
            total += ecf_error(&gaussian_matrix(&mut seeded(1000 + s, n as u64), n, 2), &points)?;
        }
        avgs.push(total / 20.0);
    }
    ensure(
        avgs.windows(2).all(|w| w[1] < w[0]),
        format!("errors over n = 1e2, 1e3, 1e4 not decreasing: {avgs:?}"),
    )?;
    Ok(format!(
        "n=1e5 error {err:.4}; 20-seed mean errors {:.4} > {:.4} > {:.4}",
        avgs[0], avgs[1], avgs[2]
    ))
}

// 3 ------------------------------------------------------------------------

/// Largest elementwise `|a - n| / max(|a|, |n|, 1e-6)` between analytic
/// gradient `a` and central differences of `f` around `x`.
fn fd_compare(x: &[f64], analytic: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut p = x.to_vec();
    for i in 0..x.len() {
        p[i] = x[i] + h;
        let up = f(&p);
        p[i] = x[i] - h;
        let down = f(&p);
        p[i] = x[i];
        let num = (up - down) / (2.0 * h);
        let a = analytic[i];
        worst = worst.max((a - num).abs() / a.abs().max(num.abs()).max(1e-6));
    }
    worst
}

fn loss_value(x: &Tensor, y: &Tensor, t: &Tensor) -> f64 {
    let mut tape = Tape::new();
    let (xv, yv, tv) = (tape.constant(x), tape.constant(y), tape.constant(t));
    let l = cf_loss(&mut tape, xv, yv, tv).unwrap();
    tape.scalar(l).unwrap()
}

fn with_values(like: &Tensor, v: &[f64]) -> Tensor {
    Tensor::new(like.shape().to_vec(), v.to_vec()).unwrap()
}

fn gradient_fidelity() -> Check {
    let m = 3;
    let x = gaussian_matrix(&mut seeded(1, 30), 16, m);
    let y = gaussian_matrix(&mut seeded(2, 30), 12, m);
    let t = gaussian_matrix(&mut seeded(3, 30), 10, m);
    let mut report = Vec::new();

    // Generated samples and query points.
    let mut tape = Tape::new();
    let xv = tape.constant(&x);
    let yv = tape.leaf(&y.clone().with_grad());
    let tv = tape.leaf(&t.clone().with_grad());
    let l = cf_loss(&mut tape, xv, yv, tv).map_err(|e| e.to_string())?;
    let g = tape.backward(l).map_err(|e| e.to_string())?;
    let e_y = fd_compare(y.values(), g.get(yv), |v| loss_value(&x, &with_values(&y, v), &t));
    let e_t = fd_compare(t.values(), g.get(tv), |v| loss_value(&x, &y, &with_values(&t, v)));
    report.push(("samples", e_y));
    report.push(("points", e_t));

    // Generator parameters.
    let gen = mlp_init(&generator_spec(4, m), 8);
    let z = gaussian_matrix(&mut seeded(4, 30), 12, 4);
    let gen_loss = |g: &Mlp| loss_value(&x, &g.apply(&z).unwrap(), &t);
    let mut tape = Tape::new();
    let vars = gen.params.bind(&mut tape);
    let (xv, zv, tv) = (tape.constant(&x), tape.constant(&z), tape.constant(&t));
    let yv = gen.forward(&mut tape, zv, &vars).map_err(|e| e.to_string())?;
    let l = cf_loss(&mut tape, xv, yv, tv).map_err(|e| e.to_string())?;
    let grads = tape.backward(l).map_err(|e| e.to_string())?;
    let analytic: Vec<f64> = vars.iter().flat_map(|v| grads.get(*v).to_vec()).collect();
    let e_g = fd_compare(&gen.params.flat_values(), &analytic, |v| {
        let mut g = gen.clone();
        g.params.set_flat_values(v).unwrap();
        gen_loss(&g)
    });
    report.push(("generator", e_g));

    // Sampler parameters (GNN, and the MLP for good measure).
    let base = QueryPoints::new(t.clone()).map_err(|e| e.to_string())?;
    let aug = observed_discrepancy(&x, &y, &base).map_err(|e| e.to_string())?;
    for kind in [SamplerKind::Gnn, SamplerKind::Mlp] {
        let cfg = SamplerConfig {
            hidden: 16,
            k: 4,
            ..SamplerConfig::with_kind(kind)
        };
        let sampler = SamplerParams::init(cfg, m, 9).map_err(|e| e.to_string())?;
        let sampler_loss = |s: &SamplerParams| loss_value(&x, &y, propose_points(&aug, s).unwrap().tensor());
        let mut tape = Tape::new();
        let vars = sampler.params.bind(&mut tape);
        let (xv, yv) = (tape.constant(&x), tape.constant(&y));
        let tv = propose(&mut tape, &aug, &sampler, &vars).map_err(|e| e.to_string())?;
        let l = cf_loss(&mut tape, xv, yv, tv).map_err(|e| e.to_string())?;
        let grads = tape.backward(l).map_err(|e| e.to_string())?;
        let analytic: Vec<f64> = vars.iter().flat_map(|v| grads.get(*v).to_vec()).collect();
        let e = fd_compare(&sampler.params.flat_values(), &analytic, |v| {
            let mut s = sampler.clone();
            s.params.set_flat_values(v).unwrap();
            sampler_loss(&s)
        });
        report.push((if kind == SamplerKind::Gnn { "gnn" } else { "mlp" }, e));
    }

    let text = report
        .iter()
        .map(|(n, e)| format!("{n} {e:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(report.iter().all(|(_, e)| *e < 1e-4), format!("relative errors: {text}"))?;
    Ok(format!("max relative errors: {text}"))
}

// 4 ------------------------------------------------------------------------

fn brute_force_knn(rows: &[Vec<f64>], k: usize) -> Vec<Vec<usize>> {
    let n = rows.len();
    let k = k.min(n - 1);
    (0..n)
        .map(|i| {
            let mut others: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                    (d, j)
                })
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            others.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

fn knn_correctness() -> Check {
    let mut rng = seeded(404, 0);
    let mut ties = 0;
    for inst in 0..50 {
        let n = rng.random_range(2..=200);
        let m = rng.random_range(1..=4);
        let k = rng.random_range(1..=12);
        let lattice = inst % 3 == 0;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        if lattice {
                            rng.random_range(-2i32..=2) as f64
                        } else {
                            rng.random_range(-3.0..3.0)
                        }
                    })
                    .collect()
            })
            .collect();
        ties += lattice as usize;
        let graph = build_knn_graph(&QueryPoints::from_rows(&rows).map_err(|e| e.to_string())?, k).map_err(|e| e.to_string())?;
        let oracle = brute_force_knn(&rows, k);
        for (i, want) in oracle.iter().enumerate() {
            ensure(
                graph.neighbors(i) == want.as_slice(),
                format!("instance {inst} (n={n}, m={m}, k={k}) node {i}: {:?} vs oracle {want:?}", graph.neighbors(i)),
            )?;
            let set: BTreeSet<_> = want.iter().collect();
            ensure(set.len() == want.len() && !set.contains(&i), "oracle sanity")?;
        }
    }
    Ok(format!("50 instances match the brute-force oracle ({ties} with heavy ties)"))
}

// 5 ------------------------------------------------------------------------

fn percentage_bound() -> Check {
    let mut rng = seeded(505, 0);
    let mut coords = 0usize;
    let mut zeros = 0usize;
    for draw in 0..1000u64 {
        let kind = if draw % 2 == 0 { SamplerKind::Gnn } else { SamplerKind::Mlp };
        let m = rng.random_range(1..=4);
        let cfg = SamplerConfig {
            hidden: 16,
            ..SamplerConfig::with_kind(kind)
        };
        let mut sampler = SamplerParams::init(cfg, m, draw).map_err(|e| e.to_string())?;
        let scale: f64 = 10f64.powf(rng.random_range(-1.0..2.0));
        let flat: Vec<f64> = sampler
            .params
            .flat_values()
            .iter()
            .map(|v| v * scale + rng.random_range(-0.1..0.1))
            .collect();
        sampler.params.set_flat_values(&flat).map_err(|e| e.to_string())?;

        let b = rng.random_range(2..=32);
        let mut pts = gaussian_matrix(&mut rng, b, m);
        for v in pts.values_mut() {
            if rng.random_bool(0.15) {
                *v = 0.0;
            } else if rng.random_bool(0.1) {
                *v *= 1e3;
            }
        }
        let pts = QueryPoints::new(pts).map_err(|e| e.to_string())?;
        let channel: Vec<f64> = (0..b).map(|_| rng.random_range(0.0..2.0)).collect();
        let aug = AugmentedPoints::new(&pts, &channel).map_err(|e| e.to_string())?;
        let out = propose_points(&aug, &sampler).map_err(|e| e.to_string())?;
        let alpha = sampler.config.alpha;
        for (t, u) in pts.tensor().values().iter().zip(out.tensor().values()) {
            coords += 1;
            if *t == 0.0 {
                zeros += 1;
                ensure(*u == 0.0, format!("draw {draw}: zero coordinate moved to {u}"))?;
            } else {
                let lo = (1.0 - alpha) * t.abs();
                let hi = (1.0 + alpha) * t.abs();
                ensure(
                    u.signum() == t.signum() && u.abs() >= lo && u.abs() <= hi,
                    format!("draw {draw}: {t} -> {u} outside [{lo}, {hi}]"),
                )?;
            }
        }
    }
    Ok(format!("{coords} coordinates within (1 ± α)|t|, {zeros} zero coordinates fixed"))
}

// 6 ------------------------------------------------------------------------

fn surface_benchmark_ordering() -> Check {
    let mut means = [Vec::new(), Vec::new(), Vec::new()];
    let mut stds = [Vec::new(), Vec::new(), Vec::new()];
    for seed in 0..5 {
        let config = PocConfig {
            seed,
            ..PocConfig::default()
        };
        for (i, kind) in SamplerKind::ALL.into_iter().enumerate() {
            let (r, _) = run_poc(kind, &config).map_err(|e| e.to_string())?;
            ensure(r.per_surface.len() == 1000, "evaluated on the wrong number of surfaces")?;
            means[i].push(r.mean_ll);
            stds[i].push(r.std_ll);
        }
    }
    let mean: Vec<f64> = means.iter().map(|v| median(v.clone())).collect();
    let std: Vec<f64> = stds.iter().map(|v| median(v.clone())).collect();
    let (g, m, n) = (0, 1, 2);
    let detail = format!(
        "median mean LL gnn {:.2} / mlp {:.2} / gaussian {:.2}; median std gnn {:.2} / mlp {:.2} / gaussian {:.2}",
        mean[n], mean[m], mean[g], std[n], std[m], std[g]
    );
    ensure(mean[n] > mean[m] && mean[m] > mean[g], format!("mean ordering violated: {detail}"))?;
    ensure(std[n] < std[m] && std[m] < std[g], format!("std ordering violated: {detail}"))?;
    Ok(detail)
}

// 7 ------------------------------------------------------------------------

fn toy_training() -> Check {
    let mut energy = [Vec::new(), Vec::new()];
    let mut coverage = [Vec::new(), Vec::new()];
    for seed in 0..5 {
        for (i, kind) in [SamplerKind::Gnn, SamplerKind::Gaussian].into_iter().enumerate() {
            let mut config = ToyRunConfig::default();
            config.train.seed = seed;
            config.train.sampler = SamplerConfig::with_kind(kind);
            ensure(config.train.steps == 5000, "toy budget is not 5000 steps")?;
            let out = run_toy(&config).map_err(|e| e.to_string())?;
            energy[i].push(out.energy);
            coverage[i].push(out.coverage.unwrap_or(0) as f64);
        }
    }
    let ed_gnn = median(energy[0].clone());
    let ed_gauss = median(energy[1].clone());
    let cov_gnn = median(coverage[0].clone());
    let detail = format!(
        "gnn coverage {cov_gnn} (median of {:?}), gnn ED {ed_gnn:.4}, gaussian ED {ed_gauss:.4}",
        coverage[0]
    );
    ensure(cov_gnn >= 7.0, format!("coverage too low: {detail}"))?;
    ensure(ed_gnn < 0.05, format!("energy distance too high: {detail}"))?;
    ensure(ed_gauss > ed_gnn, format!("gaussian sampler not worse: {detail}"))?;
    Ok(detail)
}

// 8 ------------------------------------------------------------------------

fn frozen_feature_generation() -> Check {
    let data = latent_dataset(10_000).map_err(|e| e.to_string())?;
    let (mut ae, mse) = pretrain_autoencoder(&data, &AeConfig::default()).map_err(|e| e.to_string())?;
    ensure(mse < 0.05, format!("autoencoder reconstruction MSE {mse} >= 0.05"))?;
    ae.freeze();
    let before: Vec<u64> = ae
        .encoder
        .params
        .flat_values()
        .into_iter()
        .chain(ae.decoder.params.flat_values())
        .map(f64::to_bits)
        .collect();
    let mut ratios = Vec::new();
    let mut final_ed = [Vec::new(), Vec::new()];
    for seed in 0..5 {
        for (i, kind) in [SamplerKind::Gnn, SamplerKind::Gaussian].into_iter().enumerate() {
            let mut config = LatentConfig::default();
            config.train.seed = seed;
            config.train.sampler = SamplerConfig::with_kind(kind);
            let out = run_latent_experiment(&ae, &data, &config).map_err(|e| e.to_string())?;
            ensure(out.ae_unchanged, format!("seed {seed} {kind}: autoencoder changed"))?;
            let first = out.trace.first().ok_or("empty trace")?;
            let last = out.trace.last().ok_or("empty trace")?;
            if kind == SamplerKind::Gnn {
                ratios.push(last.cf_loss / first.cf_loss);
            }
            final_ed[i].push(last.energy_latent);
        }
    }
    let after: Vec<u64> = ae
        .encoder
        .params
        .flat_values()
        .into_iter()
        .chain(ae.decoder.params.flat_values())
        .map(f64::to_bits)
        .collect();
    ensure(before == after, "autoencoder parameters are not bit-identical")?;
    let worst_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let ed_gnn = median(final_ed[0].clone());
    let ed_gauss = median(final_ed[1].clone());
    let detail = format!(
        "AE MSE {mse:.4}; gnn final/initial CF loss worst {worst_ratio:.3}; median latent ED gnn {ed_gnn:.5} vs gaussian {ed_gauss:.5}"
    );
    ensure(worst_ratio < 0.1, format!("CF loss not reduced 10x: {detail}"))?;
    ensure(ed_gnn < ed_gauss, format!("gnn not better than gaussian: {detail}"))?;
    Ok(detail)
}

// 9 ------------------------------------------------------------------------

fn small_config(command: Command, out: &Path, pairs: &[(&str, String)]) -> RunConfig {
    let mut pairs: Vec<(String, String)> = pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    pairs.push(("out".into(), out.display().to_string()));
    RunConfig::resolve(command, &pairs, &[]).unwrap()
}

fn run_twice(name: &str, command: Command, root: &Path, pairs: &[(&str, String)]) -> Result<Vec<String>, String> {
    let a = root.join(format!("{name}-a"));
    let b = root.join(format!("{name}-b"));
    let files = run(&small_config(command, &a, pairs)).map_err(|e| format!("{name}: {e}"))?;
    run(&small_config(command, &b, pairs)).map_err(|e| format!("{name}: {e}"))?;
    let mut compared = Vec::new();
    for f in files.iter().filter(|f| f.ends_with(".csv") && f.as_str() != "timing.csv") {
        let x = fs::read(a.join(f)).map_err(|e| e.to_string())?;
        let y = fs::read(b.join(f)).map_err(|e| e.to_string())?;
        ensure(x == y, format!("{name}: {f} differs between runs"))?;
        compared.push(format!("{name}/{f}"));
    }
    ensure(!compared.is_empty(), format!("{name} wrote no metrics CSV"))?;
    Ok(compared)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let train = |steps: &str| -> Vec<(&'static str, String)> {
        vec![
            ("steps", steps.into()),
            ("n", "1000".into()),
            ("holdout", "200".into()),
            ("eval_samples", "200".into()),
            ("log_every", "5".into()),
            ("b_d", "64".into()),
            ("b_g", "64".into()),
        ]
    };
    let mut compared = Vec::new();
    compared.extend(run_twice("poc", Command::Poc, root, &[("surfaces", "10".into()), ("steps", "10".into())])?);
    compared.extend(run_twice(
        "pretrain-ae",
        Command::PretrainAe,
        root,
        &[("steps", "200".into()), ("n", "1000".into())],
    )?);
    compared.extend(run_twice("train-toy", Command::TrainToy, root, &train("40"))?);
    let ae = root.join("pretrain-ae-a").join("checkpoint.json").display().to_string();
    let mut latent = train("40");
    latent.push(("checkpoint", ae));
    compared.extend(run_twice("train-latent", Command::TrainLatent, root, &latent)?);
    for source in ["poc-a", "train-toy-a", "train-latent-a", "pretrain-ae-a"] {
        let ck = root.join(source).join("checkpoint.json").display().to_string();
        compared.extend(run_twice(&format!("eval-{source}"), Command::Eval, root, &[("checkpoint", ck)])?);
    }
    Ok(format!("{} CSVs byte-identical across reruns", compared.len()))
}

#[test]
fn acceptance_criteria() {
    let secs = Duration::from_secs;
    let results = [
        run_criterion(1, "decomposition identity", secs(1), decomposition_identity),
        run_criterion(2, "ECF oracle agreement", secs(10), ecf_oracle),
        run_criterion(3, "gradient fidelity", secs(30), gradient_fidelity),
        run_criterion(4, "kNN graph correctness", secs(5), knn_correctness),
        run_criterion(5, "percentage-update bound", secs(5), percentage_bound),
        run_criterion(6, "surface benchmark ordering", secs(15 * 60), surface_benchmark_ordering),
        run_criterion(7, "toy generative training", secs(20 * 60), toy_training),
        run_criterion(8, "frozen-feature generation", secs(30 * 60), frozen_feature_generation),
        run_criterion(9, "determinism", secs(10 * 60), determinism),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
