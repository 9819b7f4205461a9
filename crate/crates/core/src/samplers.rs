//! Query-point proposal mechanisms.
//!
//! Three kinds share one interface: a fixed Gaussian sampler that returns
//! its input points, a per-point MLP, and a graph network that mixes each
//! point's features with those of its k nearest neighbours. The learned
//! kinds never move a point directly. They emit a bounded fraction
//! `δ ∈ (−1, 1)^m` per point and return `t ⊙ (1 + α δ)`, so every
//! coordinate keeps its sign and changes by at most `α` of its magnitude.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::cf::{ComplexValues, QueryPoints, EPS};
use crate::error::{Error, Result};
use crate::nets::uniform_weight;
use crate::params::ParamSet;
use crate::rng::{gaussian_matrix, seeded, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    Gaussian,
    Mlp,
    Gnn,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 3] = [SamplerKind::Gaussian, SamplerKind::Mlp, SamplerKind::Gnn];

    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Gaussian => "gaussian",
            SamplerKind::Mlp => "mlp",
            SamplerKind::Gnn => "gnn",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(SamplerKind::Gaussian),
            "mlp" => Ok(SamplerKind::Mlp),
            "gnn" => Ok(SamplerKind::Gnn),
            other => Err(Error::config(
                "sampler",
                format!("unknown sampler kind `{other}` (expected gaussian, mlp or gnn)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    /// Largest fractional change of any coordinate.
    pub alpha: f64,
    /// Neighbours per node in the kNN graph.
    pub k: usize,
    /// Message-passing (or hidden) layers.
    pub layers: usize,
    pub hidden: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            kind: SamplerKind::Gnn,
            alpha: 0.5,
            k: 8,
            layers: 2,
            hidden: 64,
        }
    }
}

impl SamplerConfig {
    pub fn with_kind(kind: SamplerKind) -> Self {
        SamplerConfig {
            kind,
            ..Self::default()
        }
    }
}

/// Trainable state of a sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerParams {
    pub config: SamplerConfig,
    /// Dimensionality `m` of the query points.
    pub dim: usize,
    pub params: ParamSet,
    version: u64,
}

impl SamplerParams {
    pub fn init(config: SamplerConfig, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Contract("sampler dimension must be positive".into()));
        }
        if !(config.alpha > 0.0 && config.alpha < 1.0) {
            return Err(Error::config("alpha", format!("{} not in (0, 1)", config.alpha)));
        }
        let mut params = ParamSet::new();
        if config.kind != SamplerKind::Gaussian {
            if config.layers == 0 || config.hidden == 0 {
                return Err(Error::config("layers", "learned samplers need layers >= 1 and hidden >= 1"));
            }
            let mut rng = seeded(seed, stream::INIT);
            let (prefix, fan) = match config.kind {
                SamplerKind::Gnn => ("gnn", 2),
                _ => ("mlp", 1),
            };
            let mut width = dim + 1;
            for l in 0..config.layers {
                params.push(format!("{prefix}.l{l}.w"), uniform_weight(&mut rng, fan * width, config.hidden));
                params.push(format!("{prefix}.l{l}.b"), Tensor::zeros(vec![config.hidden]));
                width = config.hidden;
            }
            params.push("head.w", uniform_weight(&mut rng, width, dim));
            params.push("head.b", Tensor::zeros(vec![dim]));
        }
        Ok(SamplerParams {
            config,
            dim,
            params,
            version: 0,
        })
    }

    pub fn kind(&self) -> SamplerKind {
        self.config.kind
    }

    /// Number of optimizer updates applied so far.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub(crate) fn bump_version(&mut self) {
        self.version += 1;
    }

    /// Zeros the output head, turning the sampler into the identity map.
    pub fn zero_head(&mut self) {
        self.params.zero_prefix("head.");
    }
}

/// `b_t` i.i.d. standard Gaussian points in `R^m`, deterministic per seed.
pub fn sample_base_points(b_t: usize, m: usize, seed: u64) -> Result<QueryPoints> {
    sample_base_points_with(&mut seeded(seed, stream::BASE_POINTS), b_t, m)
}

/// [`sample_base_points`] drawing from a caller-owned stream.
pub fn sample_base_points_with(rng: &mut impl Rng, b_t: usize, m: usize) -> Result<QueryPoints> {
    if b_t < 2 || m < 1 {
        return Err(Error::Contract(format!("need b_t >= 2 and m >= 1, got b_t={b_t}, m={m}")));
    }
    QueryPoints::new(gaussian_matrix(rng, b_t, m))
}

/// Directed k-nearest-neighbour graph over query points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    k: usize,
    neighbors: Vec<Vec<usize>>,
}

impl Graph {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Neighbours of node `i`, nearest first.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Row-stochastic `b_t x b_t` matrix averaging each node's neighbours.
    pub fn mean_aggregation(&self) -> Tensor {
        let n = self.num_nodes;
        let mut values = vec![0.0; n * n];
        let w = 1.0 / self.k as f64;
        for (i, nb) in self.neighbors.iter().enumerate() {
            for &j in nb {
                values[i * n + j] = w;
            }
        }
        Tensor::new(vec![n, n], values).expect("finite weights")
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Builds the kNN graph under Euclidean distance. `k` is clamped to
/// `b_t − 1`; ties go to the lower node index.
pub fn build_knn_graph(points: &QueryPoints, k: usize) -> Result<Graph> {
    let n = points.count();
    if n < 2 || k < 1 {
        return Err(Error::Contract(format!("kNN graph needs b_t >= 2 and k >= 1, got {n} and {k}")));
    }
    let k = k.min(n - 1);
    let neighbors = (0..n)
        .map(|i| {
            let pi = points.point(i);
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (sq_dist(pi, points.point(j)), j))
                .collect();
            cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            cand.truncate(k);
            cand.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    Ok(Graph {
        num_nodes: n,
        k,
        neighbors,
    })
}

/// Query points with one extra trailing column carrying an observed,
/// nonnegative value per point (a local discrepancy estimate).
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPoints {
    points: QueryPoints,
    features: Tensor,
}

impl AugmentedPoints {
    pub fn new(points: &QueryPoints, channel: &[f64]) -> Result<Self> {
        let (n, m) = (points.count(), points.dim());
        if channel.len() != n {
            return Err(Error::shape(
                "augment",
                format!("{} channel values for {n} points", channel.len()),
            ));
        }
        if let Some(bad) = channel.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::Contract(format!("augmentation value {bad} is not a finite nonnegative number")));
        }
        let mut values = Vec::with_capacity(n * (m + 1));
        for (i, &c) in channel.iter().enumerate() {
            values.extend_from_slice(points.point(i));
            values.push(c);
        }
        Ok(AugmentedPoints {
            points: points.clone(),
            features: Tensor::new(vec![n, m + 1], values)?,
        })
    }

    pub fn points(&self) -> &QueryPoints {
        &self.points
    }

    /// The `b_t x (m + 1)` feature matrix.
    pub fn features(&self) -> &Tensor {
        &self.features
    }

    /// The trailing augmentation column.
    pub fn channel(&self) -> Vec<f64> {
        let w = self.features.cols();
        self.features.values().iter().skip(w - 1).step_by(w).copied().collect()
    }
}

/// Appends `sqrt(c(t_i) + EPS)` for each point, computed from detached ECF
/// values.
pub fn augment_with_loss(points: &QueryPoints, ecf_x: &ComplexValues, ecf_y: &ComplexValues) -> Result<AugmentedPoints> {
    let n = points.count();
    if ecf_x.len() != n || ecf_y.len() != n {
        return Err(Error::shape(
            "augment_with_loss",
            format!("{n} points, ECFs of length {} and {}", ecf_x.len(), ecf_y.len()),
        ));
    }
    let channel: Vec<f64> = (0..n)
        .map(|i| {
            let dr = ecf_x.re[i] - ecf_y.re[i];
            let di = ecf_x.im[i] - ecf_y.im[i];
            (dr * dr + di * di + EPS).sqrt()
        })
        .collect();
    AugmentedPoints::new(points, &channel)
}

fn check_kind(params: &SamplerParams, want: SamplerKind, vars: &[Var], aug: &AugmentedPoints) -> Result<()> {
    if params.kind() != want {
        return Err(Error::Contract(format!("expected {want} sampler, got {}", params.kind())));
    }
    if vars.len() != params.params.len() {
        return Err(Error::shape("sampler forward", "parameter handle count"));
    }
    if aug.points().dim() != params.dim {
        return Err(Error::shape(
            "sampler forward",
            format!("points of dim {} for a sampler of dim {}", aug.points().dim(), params.dim),
        ));
    }
    Ok(())
}

/// `t ⊙ (1 + α tanh(raw))`.
fn percentage_update(tape: &mut Tape, points: &QueryPoints, raw: Var, alpha: f64) -> Result<Var> {
    let t = points.bind(tape);
    let delta = tape.tanh(raw)?;
    let frac = tape.scale(delta, alpha)?;
    let factor = tape.add_scalar(frac, 1.0)?;
    tape.mul(t, factor)
}

fn head(tape: &mut Tape, h: Var, vars: &[Var]) -> Result<Var> {
    let n = vars.len();
    let z = tape.matmul(h, vars[n - 2])?;
    tape.add(z, vars[n - 1])
}

/// Graph-network proposal. Each layer maps node features to
/// `tanh([h_i ‖ mean_{j∈N(i)} h_j] W + b)`; a linear head then produces the
/// percentage update.
pub fn gnn_forward(tape: &mut Tape, graph: &Graph, aug: &AugmentedPoints, params: &SamplerParams, vars: &[Var]) -> Result<Var> {
    check_kind(params, SamplerKind::Gnn, vars, aug)?;
    if graph.num_nodes() != aug.points().count() {
        return Err(Error::shape(
            "gnn_forward",
            format!("graph has {} nodes, {} points given", graph.num_nodes(), aug.points().count()),
        ));
    }
    let agg = tape.constant(&graph.mean_aggregation());
    let mut h = tape.constant(aug.features());
    for l in 0..params.config.layers {
        let neigh = tape.matmul(agg, h)?;
        let cat = tape.concat(h, neigh)?;
        let z = tape.matmul(cat, vars[2 * l])?;
        let z = tape.add(z, vars[2 * l + 1])?;
        h = tape.tanh(z)?;
    }
    let raw = head(tape, h, vars)?;
    percentage_update(tape, aug.points(), raw, params.config.alpha)
}

/// Per-point MLP proposal; no neighbour information.
pub fn mlp_forward(tape: &mut Tape, aug: &AugmentedPoints, params: &SamplerParams, vars: &[Var]) -> Result<Var> {
    check_kind(params, SamplerKind::Mlp, vars, aug)?;
    let mut h = tape.constant(aug.features());
    for l in 0..params.config.layers {
        let z = tape.matmul(h, vars[2 * l])?;
        let z = tape.add(z, vars[2 * l + 1])?;
        h = tape.tanh(z)?;
    }
    let raw = head(tape, h, vars)?;
    percentage_update(tape, aug.points(), raw, params.config.alpha)
}

/// Proposes updated query points. The Gaussian kind returns its input
/// unchanged; the GNN kind builds its kNN graph on the input points.
pub fn propose(tape: &mut Tape, aug: &AugmentedPoints, params: &SamplerParams, vars: &[Var]) -> Result<Var> {
    match params.kind() {
        SamplerKind::Gaussian => Ok(aug.points().bind(tape)),
        SamplerKind::Mlp => mlp_forward(tape, aug, params, vars),
        SamplerKind::Gnn => {
            let graph = build_knn_graph(aug.points(), params.config.k)?;
            gnn_forward(tape, &graph, aug, params, vars)
        }
    }
}

/// [`propose`] on plain data, without gradient tracking.
pub fn propose_points(aug: &AugmentedPoints, params: &SamplerParams) -> Result<QueryPoints> {
    let mut tape = Tape::new();
    let vars = params.params.bind_constant(&mut tape);
    let out = propose(&mut tape, aug, params, &vars)?;
    QueryPoints::new(tape.tensor(out))
}
