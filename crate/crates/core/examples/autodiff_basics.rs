//! Records a small computation on a tape, differentiates it and checks the
//! result against central finite differences.
//!
//! ```text
//! cargo run --example autodiff_basics
//! ```

use cfmatch::autodiff::{finite_diff_check, Tape, Tensor};

fn main() -> cfmatch::Result<()> {
    let x = Tensor::from_rows(&[vec![0.5, -1.0], vec![2.0, 0.25]])?.with_grad();
    let w = Tensor::from_rows(&[vec![1.0, 0.0, -0.5], vec![0.3, 2.0, 1.0]])?;

    // f(x) = sum(tanh(x W))
    let mut tape = Tape::new();
    let xv = tape.leaf(&x);
    let wv = tape.constant(&w);
    let h = tape.matmul(xv, wv)?;
    let h = tape.tanh(h)?;
    let f = tape.sum(h)?;
    println!("f(x) = {:.6}", tape.scalar(f)?);
    let grads = tape.backward(f)?;
    println!("df/dx = {:?}", grads.get(xv));

    let err = finite_diff_check(
        |tape, x| {
            let wv = tape.constant(&w);
            let h = tape.matmul(x, wv)?;
            let h = tape.tanh(h)?;
            tape.sum(h)
        },
        &x,
        1e-6,
    )?;
    println!("max relative error against finite differences: {err:.2e}");
    Ok(())
}
