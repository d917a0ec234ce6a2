//! Polynomial EVD of a broadband space-time covariance and its subspace split.
//!
//! cargo run --release --example pevd_decomposition [J]

use std::f64::consts::PI;
use std::time::Instant;

use subspace_lrt::experiments::{build_model, pevd_options};
use subspace_lrt::pevd::{diagonalisation_residual, partition, pevd};
use subspace_lrt::signalgen::{ground_truth_csd, ScenarioConfig};

fn main() -> subspace_lrt::Result<()> {
    let j = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let cfg = ScenarioConfig::reference(j, 10.0);
    let model = build_model(&cfg)?;
    let (r, _) = ground_truth_csd(&model, cfg.sigma_v2);
    println!("R(z): {}x{}, lags {}..={}", r.rows(), r.cols(), r.tau_min(), r.tau_max());

    let opts = pevd_options(&cfg);
    let start = Instant::now();
    let evd = pevd(&r, &opts)?;
    println!(
        "{:?} after {} iterations in {:.2?}: residual {:.2e}, Q order {}, Lambda order {}",
        evd.status,
        evd.iterations,
        start.elapsed(),
        evd.residual,
        evd.q.order(),
        evd.lambda.order()
    );
    println!("exact residual check {:.2e}", diagonalisation_residual(&r, &evd.q)?);

    println!("eigenvalues on a frequency grid (signal | noise):");
    for k in 0..8 {
        let omega = 2.0 * PI * k as f64 / 8.0;
        let lam = evd.lambda.evaluate_at(omega);
        let vals: Vec<String> = (0..cfg.m).map(|i| format!("{:7.2}", lam[(i, i)].re)).collect();
        println!("  {:4.2} | {} | {}", omega, vals[..cfg.l].join(" "), vals[cfg.l..].join(" "));
    }

    let part = partition(&evd, cfg.l)?;
    let cross = part.q_perp.paraconjugate().multiply(&part.q_par)?;
    println!("Q_par {:?}, Q_perp {:?}, cross energy {:.2e}", part.q_par.shape(), part.q_perp.shape(), cross.energy());
    Ok(())
}
