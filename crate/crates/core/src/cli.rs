//! Config parsing and the command runner behind the `cfmatch` binary.
//!
//! A run is configured by an optional flat `key=value` file (blank lines
//! and `#` comments allowed) with command-line flags layered on top. Every
//! run writes into its output directory:
//!
//! - `config.txt`: every effective key, one `key=value` per line;
//! - one or more result CSVs (header row, comma separated);
//! - `checkpoint.json` for commands that produce parameters;
//! - `manifest.txt`: the list of files the run wrote.
//!
//! Exit codes: 0 on success, 1 when training hits a non-finite value,
//! 2 on configuration errors (including a missing checkpoint or an output
//! directory that would be clobbered).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::autodiff::Tensor;
use crate::checkpoint::Checkpoint;
use crate::error::{Error, Result};
use crate::experiments::latent::{latent_dataset, pretrain_autoencoder, run_latent_experiment, AeConfig, LatentConfig};
use crate::experiments::metrics::{energy_distance, mode_coverage};
use crate::experiments::poc::{evaluate_poc, gen_poc_surfaces, run_poc, PocChannel, PocConfig, POC_DIM};
use crate::experiments::toy::{make_toy_dataset, ring8_centers, run_toy, ToyKind, ToyRunConfig, ToySpec, COVERAGE_RADIUS};
use crate::nets::{generator_spec, mlp_init, Autoencoder, Mlp};
use crate::rng::{gaussian_matrix, seeded, stream};
use crate::samplers::{sample_base_points_with, SamplerConfig, SamplerKind, SamplerParams};
use crate::training::{cf_loss_at, MetricsRow, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Poc,
    PretrainAe,
    TrainToy,
    TrainLatent,
    Eval,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Poc => "poc",
            Command::PretrainAe => "pretrain-ae",
            Command::TrainToy => "train-toy",
            Command::TrainLatent => "train-latent",
            Command::Eval => "eval",
        }
    }

    fn default_steps(self) -> usize {
        match self {
            Command::Poc => PocConfig::default().steps,
            Command::PretrainAe => AeConfig::default().steps,
            _ => 5000,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Command::Poc, Command::PretrainAe, Command::TrainToy, Command::TrainLatent, Command::Eval]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::config("command", format!("unknown command `{s}`")))
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub sampler: SamplerKind,
    pub steps: usize,
    pub seed: u64,
    pub b_d: usize,
    pub b_g: usize,
    pub b_t: usize,
    pub lr_g: f64,
    pub lr_gnn: f64,
    pub log_every: usize,
    /// Dataset for `train-toy`.
    pub dataset: ToyKind,
    /// Training rows for `train-toy`, `pretrain-ae` and `train-latent`.
    pub n: usize,
    pub holdout: usize,
    pub eval_samples: usize,
    /// Train and test surface count for `poc`.
    pub surfaces: usize,
    pub poc_lr: f64,
    pub poc_channel: PocChannel,
    pub ae_lr: f64,
    pub ae_batch: usize,
    pub out: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub overwrite: bool,
}

/// Every key a config file or flag may set.
pub const KEYS: &[&str] = &[
    "sampler",
    "steps",
    "seed",
    "b_d",
    "b_g",
    "b_t",
    "lr_G",
    "lr_GNN",
    "log_every",
    "dataset",
    "n",
    "holdout",
    "eval_samples",
    "surfaces",
    "poc_lr",
    "poc_channel",
    "ae_lr",
    "ae_batch",
    "out",
    "checkpoint",
    "overwrite",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        let train = TrainConfig::default();
        RunConfig {
            command,
            sampler: SamplerKind::Gnn,
            steps: command.default_steps(),
            seed: 0,
            b_d: train.b_d,
            b_g: train.b_g,
            b_t: train.b_t,
            lr_g: train.lr_g,
            lr_gnn: train.lr_gnn,
            log_every: train.log_every,
            dataset: ToyKind::Ring8,
            n: 10_000,
            holdout: 2000,
            eval_samples: 2000,
            surfaces: 1000,
            poc_lr: PocConfig::default().lr,
            poc_channel: PocConfig::default().channel,
            ae_lr: AeConfig::default().lr,
            ae_batch: AeConfig::default().batch,
            out: PathBuf::from("runs").join(command.name()),
            checkpoint: None,
            overwrite: false,
        }
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "sampler" => {
                self.sampler = value.parse()?;
            }
            "steps" => self.steps = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "b_d" => self.b_d = parse_num(key, value)?,
            "b_g" => self.b_g = parse_num(key, value)?,
            "b_t" => self.b_t = parse_num(key, value)?,
            "lr_G" => self.lr_g = parse_num(key, value)?,
            "lr_GNN" => self.lr_gnn = parse_num(key, value)?,
            "log_every" => self.log_every = parse_num(key, value)?,
            "dataset" => self.dataset = value.parse()?,
            "n" => self.n = parse_num(key, value)?,
            "holdout" => self.holdout = parse_num(key, value)?,
            "eval_samples" => self.eval_samples = parse_num(key, value)?,
            "surfaces" => self.surfaces = parse_num(key, value)?,
            "poc_lr" => self.poc_lr = parse_num(key, value)?,
            "poc_channel" => {
                self.poc_channel = match value {
                    "density" => PocChannel::Density,
                    "relative" => PocChannel::Relative,
                    other => return Err(Error::config(key, format!("unknown channel `{other}`"))),
                }
            }
            "ae_lr" => self.ae_lr = parse_num(key, value)?,
            "ae_batch" => self.ae_batch = parse_num(key, value)?,
            "out" => {
                if value.is_empty() {
                    return Err(Error::config(key, "empty path"));
                }
                self.out = PathBuf::from(value);
            }
            "checkpoint" => self.checkpoint = (!value.is_empty()).then(|| PathBuf::from(value)),
            "overwrite" => {
                self.overwrite = match value {
                    "true" => true,
                    "false" => false,
                    other => return Err(Error::config(key, format!("expected true or false, got `{other}`"))),
                }
            }
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    /// Builds a config from defaults, then `file` pairs, then `overrides`,
    /// and validates the result.
    pub fn resolve(command: Command, file: &[(String, String)], overrides: &[(String, String)]) -> Result<Self> {
        let mut config = RunConfig::defaults(command);
        for (k, v) in file.iter().chain(overrides) {
            config.set(k, v)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.train_config().validate()?;
        for (key, v) in [("n", self.n), ("holdout", self.holdout), ("eval_samples", self.eval_samples), ("ae_batch", self.ae_batch)] {
            if v < 2 {
                return Err(Error::config(key, format!("{v} must be at least 2")));
            }
        }
        if self.surfaces < 1 {
            return Err(Error::config("surfaces", "must be at least 1"));
        }
        for (key, v) in [("poc_lr", self.poc_lr), ("ae_lr", self.ae_lr)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("learning rate {v} must be positive")));
            }
        }
        if self.ae_batch > self.n {
            return Err(Error::config("ae_batch", format!("{} exceeds n = {}", self.ae_batch, self.n)));
        }
        match self.command {
            Command::TrainLatent if self.holdout + 2 > self.n => {
                return Err(Error::config("holdout", format!("{} leaves too few of n = {} rows", self.holdout, self.n)));
            }
            Command::TrainLatent | Command::Eval if self.checkpoint.is_none() => {
                return Err(Error::config("checkpoint", format!("required by `{}`", self.command)));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            b_d: self.b_d,
            b_g: self.b_g,
            b_t: self.b_t,
            lr_g: self.lr_g,
            lr_gnn: self.lr_gnn,
            steps: self.steps,
            seed: self.seed,
            sampler: SamplerConfig::with_kind(self.sampler),
            log_every: self.log_every,
            ..TrainConfig::default()
        }
    }

    pub fn poc_config(&self) -> PocConfig {
        PocConfig {
            train_surfaces: self.surfaces,
            test_surfaces: self.surfaces,
            b_t: self.b_t,
            steps: self.steps,
            lr: self.poc_lr,
            seed: self.seed,
            channel: self.poc_channel,
            ..PocConfig::default()
        }
    }

    /// Every effective value, keyed as in config files.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let channel = match self.poc_channel {
            PocChannel::Density => "density",
            PocChannel::Relative => "relative",
        };
        let dataset = match self.dataset {
            ToyKind::Ring8 => "ring8",
            ToyKind::Manifold32 => "manifold32",
        };
        let pairs: Vec<(&str, String)> = vec![
            ("command", self.command.to_string()),
            ("sampler", self.sampler.to_string()),
            ("steps", self.steps.to_string()),
            ("seed", self.seed.to_string()),
            ("b_d", self.b_d.to_string()),
            ("b_g", self.b_g.to_string()),
            ("b_t", self.b_t.to_string()),
            ("lr_G", self.lr_g.to_string()),
            ("lr_GNN", self.lr_gnn.to_string()),
            ("log_every", self.log_every.to_string()),
            ("dataset", dataset.to_string()),
            ("n", self.n.to_string()),
            ("holdout", self.holdout.to_string()),
            ("eval_samples", self.eval_samples.to_string()),
            ("surfaces", self.surfaces.to_string()),
            ("poc_lr", self.poc_lr.to_string()),
            ("poc_channel", channel.to_string()),
            ("ae_lr", self.ae_lr.to_string()),
            ("ae_batch", self.ae_batch.to_string()),
            ("out", self.out.display().to_string()),
            (
                "checkpoint",
                self.checkpoint.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            ),
            ("overwrite", self.overwrite.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// Parses a flat `key=value` document.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::config(line, format!("line {} is not `key=value`", i + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::config(k, "unknown key"));
        }
        pairs.push((k.to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

pub fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_text(&text)
}

/// Writes run artifacts and keeps the manifest.
struct RunDir {
    dir: PathBuf,
    overwrite: bool,
    written: Vec<String>,
}

/// Failure modes of a CLI run, each with its exit code.
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Numeric(String),
    Other(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Numeric(_) | RunError::Other(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(m) | RunError::Numeric(m) | RunError::Other(m) => f.write_str(m),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } => RunError::Usage(e.to_string()),
            Error::Diverged { .. } | Error::NonFinite { .. } => RunError::Numeric(e.to_string()),
            other => RunError::Other(other.to_string()),
        }
    }
}

type RunResult<T> = std::result::Result<T, RunError>;

impl RunDir {
    fn open(dir: &Path, overwrite: bool) -> RunResult<Self> {
        let manifest = dir.join("manifest.txt");
        if manifest.exists() && !overwrite {
            return Err(RunError::Usage(format!(
                "{} already holds a run (found {}); pass --overwrite true to replace it",
                dir.display(),
                manifest.display()
            )));
        }
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(RunDir {
            dir: dir.to_path_buf(),
            overwrite,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> RunResult<()> {
        let path = self.dir.join(name);
        if path.exists() && !self.overwrite {
            return Err(RunError::Usage(format!("refusing to overwrite {}", path.display())));
        }
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(mut self) -> RunResult<Vec<String>> {
        self.written.push("manifest.txt".to_string());
        let body: String = self.written.iter().map(|f| format!("{f}\n")).collect();
        let path = self.dir.join("manifest.txt");
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        Ok(self.written)
    }
}

pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// A matrix as CSV with columns `x0, x1, ...`.
pub fn matrix_csv(t: &Tensor) -> String {
    let header: Vec<String> = (0..t.cols()).map(|j| format!("x{j}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_table(&header, (0..t.rows()).map(|i| t.row(i).iter().map(f64::to_string).collect()))
}

fn metrics_csv(rows: &[MetricsRow]) -> (String, String) {
    let metrics = csv_table(
        &["step", "loss_g", "loss_t"],
        rows.iter()
            .map(|r| vec![r.step.to_string(), r.loss_g.to_string(), r.loss_t.to_string()]),
    );
    let timing = csv_table(
        &["step", "wall_ms"],
        rows.iter().map(|r| vec![r.step.to_string(), format!("{:.3}", r.wall_ms)]),
    );
    (metrics, timing)
}

fn config_text(echo: &BTreeMap<String, String>) -> String {
    echo.iter().fold(String::new(), |mut s, (k, v)| {
        let _ = writeln!(s, "{k}={v}");
        s
    })
}

fn load_checkpoint(path: &Path) -> RunResult<Checkpoint> {
    if !path.exists() {
        return Err(RunError::Usage(format!("checkpoint not found: {}", path.display())));
    }
    Ok(Checkpoint::load(path)?)
}

fn load_autoencoder(ck: &Checkpoint, path: &Path) -> RunResult<Autoencoder> {
    if !ck.has_prefix("ae.") {
        return Err(RunError::Usage(format!("{} holds no autoencoder", path.display())));
    }
    let mut ae = Autoencoder::default_sizes(0);
    ck.load_into("ae.", &mut ae.encoder.params)?;
    ck.load_into("ae.", &mut ae.decoder.params)?;
    Ok(ae)
}

/// The saved config of a checkpoint, re-validated.
fn stored_config(ck: &Checkpoint) -> RunResult<RunConfig> {
    let command: Command = ck
        .config
        .get("command")
        .ok_or_else(|| Error::Checkpoint("no command in stored config".into()))?
        .parse()?;
    let mut config = RunConfig::defaults(command);
    for (k, v) in &ck.config {
        if k != "command" {
            config.set(k, v)?;
        }
    }
    Ok(config)
}

/// Runs one command. Returns the list of files written.
pub fn run(config: &RunConfig) -> RunResult<Vec<String>> {
    let echo = config.echo();
    let mut ck = Checkpoint::new(config.seed, echo.clone());
    if let (Command::TrainLatent | Command::Eval, Some(path)) = (config.command, &config.checkpoint) {
        if !path.exists() {
            return Err(RunError::Usage(format!("checkpoint not found: {}", path.display())));
        }
    }
    let mut out = RunDir::open(&config.out, config.overwrite)?;
    out.write("config.txt", &config_text(&echo))?;
    match config.command {
        Command::Poc => {
            let poc = config.poc_config();
            let mut rows = Vec::new();
            for kind in SamplerKind::ALL {
                let (result, params) = run_poc(kind, &poc)?;
                ck.insert_set(&format!("{kind}."), &params.params);
                rows.push(vec![kind.to_string(), result.mean_ll.to_string(), result.std_ll.to_string()]);
            }
            out.write("poc.csv", &csv_table(&["method", "mean_ll", "std_ll"], rows))?;
            out.write("checkpoint.json", &ck.to_json()?)?;
        }
        Command::PretrainAe => {
            let data = latent_dataset(config.n)?;
            let ae_config = AeConfig {
                n: config.n,
                steps: config.steps,
                batch: config.ae_batch,
                lr: config.ae_lr,
                seed: config.seed,
            };
            let (ae, mse) = pretrain_autoencoder(&data, &ae_config)?;
            out.write("ae.csv", &csv_table(&["steps", "mse"], [vec![config.steps.to_string(), mse.to_string()]]))?;
            ck.insert_set("ae.", &ae.encoder.params);
            ck.insert_set("ae.", &ae.decoder.params);
            out.write("checkpoint.json", &ck.to_json()?)?;
        }
        Command::TrainToy => {
            let toy = ToyRunConfig {
                dataset: config.dataset,
                n: config.n,
                holdout: config.holdout,
                eval_samples: config.eval_samples,
                train: config.train_config(),
            };
            let res = run_toy(&toy)?;
            let (metrics, timing) = metrics_csv(&res.metrics);
            out.write("metrics.csv", &metrics)?;
            out.write("timing.csv", &timing)?;
            let coverage = res.coverage.map(|c| c.to_string()).unwrap_or_default();
            out.write(
                "eval.csv",
                &csv_table(&["energy_distance", "mode_coverage"], [vec![res.energy.to_string(), coverage]]),
            )?;
            out.write("samples.csv", &matrix_csv(&res.samples))?;
            ck.insert_set("gen.", &res.trainer.generator.params);
            ck.insert_set("sampler.", &res.trainer.sampler.params);
            out.write("checkpoint.json", &ck.to_json()?)?;
        }
        Command::TrainLatent => {
            let path = config.checkpoint.as_ref().expect("validated");
            let ae_ck = load_checkpoint(path)?;
            let mut ae = load_autoencoder(&ae_ck, path)?;
            ae.freeze();
            let data = latent_dataset(config.n)?;
            let latent = LatentConfig {
                train: config.train_config(),
                holdout: config.holdout,
                eval_samples: config.eval_samples,
                ..LatentConfig::default()
            };
            let res = run_latent_experiment(&ae, &data, &latent)?;
            if !res.ae_unchanged {
                return Err(RunError::Other("autoencoder parameters changed during training".into()));
            }
            let (metrics, timing) = metrics_csv(&res.metrics);
            out.write("metrics.csv", &metrics)?;
            out.write("timing.csv", &timing)?;
            out.write(
                "latent.csv",
                &csv_table(
                    &["step", "cf_loss", "energy_latent", "energy_data"],
                    res.trace.iter().map(|r| {
                        vec![
                            r.step.to_string(),
                            r.cf_loss.to_string(),
                            r.energy_latent.to_string(),
                            r.energy_data.to_string(),
                        ]
                    }),
                ),
            )?;
            out.write("samples_latent.csv", &matrix_csv(&res.generated_latents))?;
            out.write("samples_data.csv", &matrix_csv(&res.generated_data))?;
            ck.insert_set("gen.", &res.trainer.generator.params);
            ck.insert_set("sampler.", &res.trainer.sampler.params);
            ck.insert_set("ae.", &ae.encoder.params);
            ck.insert_set("ae.", &ae.decoder.params);
            out.write("checkpoint.json", &ck.to_json()?)?;
        }
        Command::Eval => {
            let path = config.checkpoint.as_ref().expect("validated");
            let table = evaluate_checkpoint(&load_checkpoint(path)?, path)?;
            out.write("eval.csv", &table)?;
        }
    }
    Ok(out.finish()?)
}

fn load_generator(ck: &Checkpoint, m: usize, noise_dim: usize) -> RunResult<Mlp> {
    let mut g = mlp_init(&generator_spec(noise_dim, m), 0);
    ck.load_into("gen.", &mut g.params)?;
    Ok(g)
}

/// Recomputes the evaluation table of a stored run from its checkpoint.
pub fn evaluate_checkpoint(ck: &Checkpoint, path: &Path) -> RunResult<String> {
    let stored = stored_config(ck)?;
    let noise_dim = TrainConfig::default().noise_dim;
    let noise = |n: usize| gaussian_matrix(&mut seeded(stored.seed, stream::EVAL), n, noise_dim);
    match stored.command {
        Command::Poc => {
            let poc = stored.poc_config();
            let test = gen_poc_surfaces(poc.test_surfaces, poc.test_seed())?;
            let mut rows = Vec::new();
            for kind in SamplerKind::ALL {
                let mut params = SamplerParams::init(SamplerConfig { kind, ..poc.sampler }, POC_DIM, 0)?;
                ck.load_into(&format!("{kind}."), &mut params.params)?;
                let r = evaluate_poc(&params, &poc, &test)?;
                rows.push(vec![kind.to_string(), r.mean_ll.to_string(), r.std_ll.to_string()]);
            }
            Ok(csv_table(&["method", "mean_ll", "std_ll"], rows))
        }
        Command::PretrainAe => {
            let ae = load_autoencoder(ck, path)?;
            let mse = ae.reconstruction_mse(&latent_dataset(stored.n)?)?;
            Ok(csv_table(&["mse"], [vec![mse.to_string()]]))
        }
        Command::TrainToy => {
            let spec = ToySpec {
                n: stored.n + stored.holdout,
                ..match stored.dataset {
                    ToyKind::Ring8 => ToySpec::ring8(0, stored.seed),
                    ToyKind::Manifold32 => ToySpec::manifold32(0, stored.seed),
                }
            };
            let all = make_toy_dataset(&spec)?;
            let heldout = all.select_rows(&(stored.n..all.rows()).collect::<Vec<_>>());
            let g = load_generator(ck, spec.dim(), noise_dim)?;
            let samples = g.apply(&noise(stored.eval_samples))?;
            let coverage = match stored.dataset {
                ToyKind::Ring8 => mode_coverage(&samples, &ring8_centers(), COVERAGE_RADIUS)?.to_string(),
                ToyKind::Manifold32 => String::new(),
            };
            Ok(csv_table(
                &["energy_distance", "mode_coverage"],
                [vec![energy_distance(&samples, &heldout)?.to_string(), coverage]],
            ))
        }
        Command::TrainLatent => {
            let ae = load_autoencoder(ck, path)?;
            let data = latent_dataset(stored.n)?;
            let hold: Vec<usize> = (stored.n - stored.holdout..stored.n).collect();
            let latents = ae.encode(&data)?;
            let g = load_generator(ck, ae.latent_dim(), noise_dim)?;
            let mut eval_rng = seeded(stored.seed, stream::EVAL);
            let gen = g.apply(&gaussian_matrix(&mut eval_rng, stored.eval_samples, noise_dim))?;
            let points = sample_base_points_with(&mut eval_rng, LatentConfig::default().eval_points, ae.latent_dim())?;
            Ok(csv_table(
                &["cf_loss", "energy_latent", "energy_data"],
                [vec![
                    cf_loss_at(&latents, &gen, points.tensor())?.to_string(),
                    energy_distance(&gen, &latents.select_rows(&hold))?.to_string(),
                    energy_distance(&ae.decode(&gen)?, &data.select_rows(&hold))?.to_string(),
                ]],
            ))
        }
        Command::Eval => Err(RunError::Usage(format!("{} is an eval output, not a run", path.display()))),
    }
}

#[derive(Parser, Debug)]
#[command(name = "cfmatch", about = "Characteristic-function distribution matching with learned query-point samplers")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
    /// Flat key=value config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// gaussian, mlp or gnn.
    #[arg(long, global = true)]
    sampler: Option<String>,
    #[arg(long, global = true)]
    steps: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    checkpoint: Option<String>,
    /// true or false.
    #[arg(long, global = true)]
    overwrite: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum CliCommand {
    /// Surface benchmark for all three samplers.
    Poc,
    /// Pre-train the autoencoder on the 32-dimensional manifold.
    PretrainAe,
    /// Train a generator on a toy dataset.
    TrainToy,
    /// Train a generator in a frozen autoencoder's latent space.
    TrainLatent,
    /// Re-evaluate a stored checkpoint.
    Eval,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::Poc => Command::Poc,
            CliCommand::PretrainAe => Command::PretrainAe,
            CliCommand::TrainToy => Command::TrainToy,
            CliCommand::TrainLatent => Command::TrainLatent,
            CliCommand::Eval => Command::Eval,
        }
    }
}

/// Parses arguments (including the program name) into a config.
pub fn parse_args<I, T>(args: I) -> RunResult<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| RunError::Usage(e.render().to_string()))?;
    let file = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => Vec::new(),
    };
    let overrides: Vec<(String, String)> = [
        ("sampler", &cli.sampler),
        ("steps", &cli.steps),
        ("seed", &cli.seed),
        ("out", &cli.out),
        ("checkpoint", &cli.checkpoint),
        ("overwrite", &cli.overwrite),
    ]
    .into_iter()
    .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
    .collect();
    Ok(RunConfig::resolve(cli.command.into(), &file, &overrides)?)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let wants_help = args.iter().any(|a| a == "--help" || a == "-h" || a == "--version" || a == "-V");
    let config = match parse_args(args) {
        Ok(c) => c,
        Err(RunError::Usage(msg)) if wants_help => {
            print!("{msg}");
            return 0;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let start = Instant::now();
    match run(&config) {
        Ok(files) => {
            eprintln!(
                "{} finished in {:.1}s; wrote {} files to {}",
                config.command,
                start.elapsed().as_secs_f64(),
                files.len(),
                config.out.display()
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
