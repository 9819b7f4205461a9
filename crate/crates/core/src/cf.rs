//! Empirical characteristic functions and the characteristic-function
//! distance between two sample sets.
//!
//! For samples `x_1..x_n` in `R^m` the ECF at a query point `t` is
//! `(1/n) Σ_k exp(j t·x_k)`. It is carried as a pair of real tensors (real
//! and imaginary parts) so that everything stays differentiable on an
//! ordinary [`Tape`], with respect to both the samples and the query points.
//!
//! The distance between two ECFs at a set of query points is the mean over
//! points of `sqrt(c(t) + EPS)`, where `c(t) = |Φ_X(t) − Φ_Y(t)|²`. `EPS`
//! keeps the square root differentiable when the two ECFs coincide.

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_psd, Matrix};

/// Stabilizer inside every modulus square root.
pub const EPS: f64 = 1e-12;

/// A batch of `b_t` frequency-domain points in `R^m`, stored as a
/// `b_t x m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPoints(Tensor);

impl QueryPoints {
    pub fn new(points: Tensor) -> Result<Self> {
        if points.shape().len() != 2 {
            return Err(Error::shape(
                "QueryPoints",
                format!("expected a b_t x m matrix, got {:?}", points.shape()),
            ));
        }
        Ok(QueryPoints(points))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Tensor::from_rows(rows)?)
    }

    pub fn count(&self) -> usize {
        self.0.rows()
    }

    pub fn dim(&self) -> usize {
        self.0.cols()
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }

    pub fn into_tensor(self) -> Tensor {
        self.0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    /// Records the points as a constant leaf.
    pub fn bind(&self, tape: &mut Tape) -> Var {
        tape.constant(&self.0)
    }
}

/// ECF values at `b_t` query points, as tape handles of shape `[b_t]`.
#[derive(Debug, Clone, Copy)]
pub struct ComplexGrid {
    pub re: Var,
    pub im: Var,
}

impl ComplexGrid {
    pub fn read(&self, tape: &Tape) -> ComplexValues {
        ComplexValues {
            re: tape.value(self.re).to_vec(),
            im: tape.value(self.im).to_vec(),
        }
    }

    /// Records plain values as constant leaves.
    pub fn constant(tape: &mut Tape, values: &ComplexValues) -> Result<Self> {
        values.check()?;
        let n = values.len();
        Ok(ComplexGrid {
            re: tape.input(vec![n], values.re.clone(), false)?,
            im: tape.input(vec![n], values.im.clone(), false)?,
        })
    }
}

/// Detached complex values, one per query point.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexValues {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexValues {
    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn modulus(&self, i: usize) -> f64 {
        self.re[i].hypot(self.im[i])
    }

    fn check(&self) -> Result<()> {
        if self.re.len() != self.im.len() || self.re.is_empty() {
            return Err(Error::shape(
                "ComplexValues",
                format!("re has {} entries, im has {}", self.re.len(), self.im.len()),
            ));
        }
        Ok(())
    }
}

/// Empirical characteristic function of `samples` (`n x m`) at `points`
/// (`b_t x m`).
pub fn ecf(tape: &mut Tape, samples: Var, points: Var) -> Result<ComplexGrid> {
    let (ss, ps) = (tape.shape(samples), tape.shape(points));
    match (ss, ps) {
        ([_, m], [_, mt]) if m == mt => {}
        _ => {
            return Err(Error::shape(
                "ecf",
                format!("samples {ss:?} vs points {ps:?}"),
            ))
        }
    }
    let xt = tape.transpose(samples)?;
    // [b_t, n] matrix of t_i · x_k
    let proj = tape.matmul(points, xt)?;
    let c = tape.cos(proj)?;
    let s = tape.sin(proj)?;
    Ok(ComplexGrid {
        re: tape.mean_last(c)?,
        im: tape.mean_last(s)?,
    })
}

fn check_pair(tape: &Tape, op: &'static str, x: &ComplexGrid, y: &ComplexGrid) -> Result<()> {
    let (a, b) = (tape.shape(x.re), tape.shape(y.re));
    if a != b || tape.shape(x.im) != a || tape.shape(y.im) != b {
        return Err(Error::shape(op, format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// Per-point squared modulus of the ECF difference, `c(t) = |Φ_X − Φ_Y|²`.
pub fn cf_quadratic(tape: &mut Tape, x: &ComplexGrid, y: &ComplexGrid) -> Result<Var> {
    check_pair(tape, "cf_quadratic", x, y)?;
    let dr = tape.sub(x.re, y.re)?;
    let di = tape.sub(x.im, y.im)?;
    let dr2 = tape.square(dr)?;
    let di2 = tape.square(di)?;
    tape.add(dr2, di2)
}

/// Per-point discrepancy `sqrt(c(t) + EPS)`.
pub fn cf_modulus_diff(tape: &mut Tape, x: &ComplexGrid, y: &ComplexGrid) -> Result<Var> {
    let c = cf_quadratic(tape, x, y)?;
    let c = tape.add_scalar(c, EPS)?;
    tape.sqrt(c)
}

/// CF distance between two sample sets at the given query points: the mean
/// over points of `sqrt(c(t) + EPS)`.
pub fn cf_loss(tape: &mut Tape, samples_x: Var, samples_y: Var, points: Var) -> Result<Var> {
    let ex = ecf(tape, samples_x, points)?;
    let ey = ecf(tape, samples_y, points)?;
    cf_loss_from_ecf(tape, &ex, &ey)
}

/// Same as [`cf_loss`] for ECFs that were already evaluated.
pub fn cf_loss_from_ecf(tape: &mut Tape, x: &ComplexGrid, y: &ComplexGrid) -> Result<Var> {
    let d = cf_modulus_diff(tape, x, y)?;
    tape.mean(d)
}

/// Splits `c(t)` into an amplitude term `(|Φ_X| − |Φ_Y|)²` and a phase term
/// `2|Φ_X||Φ_Y|(1 − cos(a_X − a_Y))`.
///
/// Moduli are `sqrt(re² + im² + EPS)`. The phase term uses
/// `|Φ_X||Φ_Y| cos(a_X − a_Y) = re_X re_Y + im_X im_Y`, which needs no angle
/// and stays defined when a modulus vanishes.
pub fn cf_loss_decomposed(tape: &mut Tape, x: &ComplexGrid, y: &ComplexGrid) -> Result<(Var, Var)> {
    check_pair(tape, "cf_loss_decomposed", x, y)?;
    let mx = modulus(tape, x)?;
    let my = modulus(tape, y)?;
    let dm = tape.sub(mx, my)?;
    let amplitude = tape.square(dm)?;

    let prod = tape.mul(mx, my)?;
    let rr = tape.mul(x.re, y.re)?;
    let ii = tape.mul(x.im, y.im)?;
    let dot = tape.add(rr, ii)?;
    let gap = tape.sub(prod, dot)?;
    let phase = tape.scale(gap, 2.0)?;
    Ok((amplitude, phase))
}

fn modulus(tape: &mut Tape, z: &ComplexGrid) -> Result<Var> {
    let r2 = tape.square(z.re)?;
    let i2 = tape.square(z.im)?;
    let s = tape.add(r2, i2)?;
    let s = tape.add_scalar(s, EPS)?;
    tape.sqrt(s)
}

/// Closed-form characteristic function `exp(j t·μ − tᵀΣt / 2)` of a Gaussian
/// at each query point.
pub fn true_gaussian_cf(points: &QueryPoints, mean: &[f64], cov: &Matrix) -> Result<ComplexValues> {
    let m = points.dim();
    if mean.len() != m || cov.len() != m {
        return Err(Error::shape(
            "true_gaussian_cf",
            format!("points have dim {m}, mean {}, cov {}", mean.len(), cov.len()),
        ));
    }
    cholesky_psd(cov)?;
    let mut re = Vec::with_capacity(points.count());
    let mut im = Vec::with_capacity(points.count());
    for i in 0..points.count() {
        let t = points.point(i);
        let phase: f64 = t.iter().zip(mean).map(|(a, b)| a * b).sum();
        let var = crate::linalg::quad_form(cov, t);
        let amp = (-0.5 * var).exp();
        re.push(amp * phase.cos());
        im.push(amp * phase.sin());
    }
    Ok(ComplexValues { re, im })
}
