use super::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Compares the tape gradient of a scalar function against central finite
/// differences.
///
/// `f` records the function on the given tape starting from the leaf for
/// `x` and returns the scalar output. Returns the largest
/// `|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)` over all
/// coordinates of `x`.
pub fn finite_diff_check<F>(f: F, x: &Tensor, step: f64) -> Result<f64>
where
    F: Fn(&mut Tape, Var) -> Result<Var>,
{
    if !(step > 0.0 && step <= 1e-3) {
        return Err(Error::Contract(format!("finite-difference step {step} outside (0, 1e-3]")));
    }
    let analytic = {
        let mut tape = Tape::new();
        let xv = tape.param(x);
        let y = f(&mut tape, xv)?;
        tape.backward(y)?.get(xv).to_vec()
    };
    let eval = |values: Vec<f64>| -> Result<f64> {
        let mut tape = Tape::new();
        let xv = tape.input(x.shape().to_vec(), values, false)?;
        let y = f(&mut tape, xv)?;
        tape.scalar(y)
    };
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let mut plus = x.values().to_vec();
        let mut minus = plus.clone();
        plus[i] += step;
        minus[i] -= step;
        let numeric = (eval(plus)? - eval(minus)?) / (2.0 * step);
        let a = analytic[i];
        let denom = a.abs().max(numeric.abs()).max(1e-8);
        worst = worst.max((a - numeric).abs() / denom);
    }
    Ok(worst)
}
