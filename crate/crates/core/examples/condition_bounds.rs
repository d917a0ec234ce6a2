//! Condition numbers of the measurement and subspace covariances against their bounds.
//!
//! cargo run --release --example condition_bounds [J] [transient dB below]

use subspace_lrt::covariance::{block_toeplitz, condition_number, projected_csd};
use subspace_lrt::experiments::{build_model, noise_subspace};
use subspace_lrt::lrt::condition_bounds;
use subspace_lrt::signalgen::{ground_truth_csd, ScenarioConfig};

fn main() -> subspace_lrt::Result<()> {
    let mut args = std::env::args().skip(1);
    let j = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let db = args.next().and_then(|s| s.parse().ok()).unwrap_or(20.0);
    let cfg = ScenarioConfig::reference(j, db);
    let model = build_model(&cfg)?;
    let (r, r_t) = ground_truth_csd(&model, cfg.sigma_v2);
    let (_, q_perp) = noise_subspace(&r, &cfg)?;
    let r01 = r.add(&r_t)?;
    let s0 = projected_csd(&r, &q_perp)?;
    let s01 = projected_csd(&r01, &q_perp)?;

    let b = condition_bounds(&model, &cfg);
    println!("bounds: measurement {:.1}, subspace H0 {:.1}, subspace H1 {:.2}", b.measurement, b.subspace_h0, b.subspace_h1);
    println!("{:>3} {:>10} {:>10} {:>10} {:>10}", "T", "gamma_x0", "gamma_x1", "gamma_s0", "gamma_s1");
    for t in 1..=10 {
        let c = |a: &subspace_lrt::LaurentMatrix| block_toeplitz(a, t).map(|bt| condition_number(&bt.matrix));
        println!("{t:>3} {:>10.2} {:>10.2} {:>10.3} {:>10.3}", c(&r)?, c(&r01)?, c(&s0)?, c(&s01)?);
    }
    Ok(())
}
