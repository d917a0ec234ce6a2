//! Random paraunitary matrices, their basic algebra and the text exchange format.
//!
//! cargo run --example paraunitary

use subspace_lrt::signalgen::{random_paraunitary, substream};
use subspace_lrt::LaurentMatrix;

fn main() -> subspace_lrt::Result<()> {
    let mut rng = substream(7, &[]);
    let q = random_paraunitary(4, 3, &mut rng);
    println!("Q: {}x{} with lags {}..={}", q.rows(), q.cols(), q.tau_min(), q.tau_max());
    println!("paraunitary deviation  {:.2e}", q.paraunitary_deviation()?);

    // a product of paraunitary matrices stays paraunitary
    let p = q.multiply(&random_paraunitary(4, 2, &mut rng))?;
    println!("product order {}, deviation {:.2e}", p.order(), p.paraunitary_deviation()?);

    // lossless: the response at every frequency is unitary
    for omega in [0.0, 1.0, 2.5] {
        let g = p.evaluate_at(omega);
        let err = (g.adjoint() * &g - nalgebra::DMatrix::identity(4, 4)).norm();
        println!("omega = {omega:.1}: |Q^H Q - I| = {err:.2e}");
    }

    let text = p.to_text();
    let back = LaurentMatrix::from_text(&text)?;
    println!("text form: {} lines, header {:?}", text.lines().count(), text.lines().next().unwrap_or(""));
    println!("round trip exact: {}", back == p);
    Ok(())
}
