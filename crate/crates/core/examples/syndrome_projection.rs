//! Projecting array data onto the noise-only subspace removes the stationary sources:
//! the syndromes are spatially and temporally white under H0, while a transient still
//! leaves a trace.
//!
//! cargo run --release --example syndrome_projection

use subspace_lrt::covariance::{estimate_csd, projected_csd};
use subspace_lrt::experiments::{build_model, noise_subspace};
use subspace_lrt::linalg::{c64, frobenius, CMatrix};
use subspace_lrt::projection::project;
use subspace_lrt::signalgen::{generate_measurements, ground_truth_csd, substream, ScenarioConfig};
use subspace_lrt::LaurentMatrix;

fn main() -> subspace_lrt::Result<()> {
    let cfg = ScenarioConfig::reference(4, 10.0);
    let model = build_model(&cfg)?;
    let (r, r_t) = ground_truth_csd(&model, cfg.sigma_v2);
    let (_, q_perp) = noise_subspace(&r, &cfg)?;
    let d = cfg.m - cfg.l;

    let white = LaurentMatrix::identity(d).scale(c64(cfg.sigma_v2, 0.0));
    let proj = projected_csd(&r, &q_perp)?;
    println!("projected CSD vs white: {:.3}% relative energy", 100.0 * proj.sub(&white)?.energy() / white.energy());
    let leak = projected_csd(&r_t, &q_perp)?;
    println!("transient energy kept in the subspace: {:.1}%", 100.0 * leak.energy().sqrt() / r_t.energy().sqrt());

    let n = 50_000;
    for (label, with_transient) in [("H0", false), ("H1", true)] {
        let x = generate_measurements(&model, &cfg, with_transient, n, &mut substream(3, &[with_transient as u64]));
        let s = project(&q_perp, &x)?;
        let rs = estimate_csd(&s.data, 3)?;
        let ident = CMatrix::identity(d, d) * c64(cfg.sigma_v2, 0.0);
        let lags: Vec<String> = rs
            .lags()
            .filter(|(tau, _)| *tau >= 0)
            .map(|(tau, c)| {
                let expect = if tau == 0 { ident.clone() } else { CMatrix::zeros(d, d) };
                format!("lag {tau}: {:.3}", frobenius(&(c - expect)) / frobenius(&ident))
            })
            .collect();
        let px = x.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.ncols() as f64;
        let ps = s.data.iter().map(|z| z.norm_sqr()).sum::<f64>() / s.len() as f64;
        println!("{label}: power x {px:8.2}, s {ps:6.3}; deviation from white  {}", lags.join(", "));
    }
    Ok(())
}
