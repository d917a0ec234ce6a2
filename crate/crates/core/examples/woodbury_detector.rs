//! The likelihood-ratio detector built three ways: direct solves, the low-rank update
//! form and its white-noise closed form.
//!
//! cargo run --release --example woodbury_detector

use subspace_lrt::covariance::block_toeplitz;
use subspace_lrt::experiments::{build_model, separability};
use subspace_lrt::linalg::{c64, frobenius, CMatrix};
use subspace_lrt::lrt::{
    build_detector, build_detector_white, build_detector_woodbury, stack_snapshots, transient_factor_full,
    DEFAULT_EIGEN_FLOOR,
};
use subspace_lrt::signalgen::{generate_measurements, ground_truth_csd, substream, ScenarioConfig};

fn main() -> subspace_lrt::Result<()> {
    let cfg = ScenarioConfig::reference(3, 10.0);
    let model = build_model(&cfg)?;
    let (r, _) = ground_truth_csd(&model, cfg.sigma_v2);
    let t = 4;

    let r0 = block_toeplitz(&r, t)?.matrix;
    let ht = transient_factor_full(&model.h_t, t, model.sigma_t2.sqrt())?;
    let direct = build_detector(&r0, &(&r0 + ht.gram()), DEFAULT_EIGEN_FLOOR)?;
    let low_rank = build_detector_woodbury(&r0, &ht)?;
    println!("K = {}, transient factor {}x{}", direct.dim(), ht.h.nrows(), ht.h.ncols());
    println!("direct vs low-rank A: {:.2e}", frobenius(&(&direct.a - &low_rank.a)) / frobenius(&direct.a));
    println!("cond R0 {:.1}, cond R0+R1 {:.1}", direct.cond_r0, direct.cond_r01);
    println!("log|R0| {:.3}, log|R0+R1| {:.3}", direct.logdet_r0, direct.logdet_r01);

    let k = r0.nrows();
    let white = build_detector_white(cfg.sigma_v2, &ht)?;
    let general = build_detector_woodbury(&(CMatrix::identity(k, k) * c64(cfg.sigma_v2, 0.0)), &ht)?;
    println!("white-noise closed form vs general: {:.2e}", frobenius(&(&white.a - &general.a)) / frobenius(&general.a));

    // statistics on data from either hypothesis
    let n = 4000 * t;
    let mut stats = [Vec::new(), Vec::new()];
    for (h, out) in stats.iter_mut().enumerate() {
        let x = generate_measurements(&model, &cfg, h == 1, n, &mut substream(11, &[h as u64]));
        for end in (t - 1..n).step_by(t) {
            out.push(direct.statistic(&stack_snapshots(&x, end, t)?));
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("mean statistic H0 {:.3}, H1 {:.3}, separability {:.3}", mean(&stats[0]), mean(&stats[1]), separability(&stats[0], &stats[1])?);
    Ok(())
}
