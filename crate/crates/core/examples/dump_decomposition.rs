//! Writes the ground-truth CSD and its polynomial eigenvectors in the plain-text Laurent
//! matrix format, then reads them back.
//!
//! cargo run --release --example dump_decomposition [output dir]

use std::path::PathBuf;

use subspace_lrt::experiments::{build_model, noise_subspace};
use subspace_lrt::signalgen::{ground_truth_csd, ScenarioConfig};
use subspace_lrt::LaurentMatrix;

fn main() -> subspace_lrt::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;
    let cfg = ScenarioConfig::reference(3, 10.0);
    let model = build_model(&cfg)?;
    let (r, _) = ground_truth_csd(&model, cfg.sigma_v2);
    let (evd, q_perp) = noise_subspace(&r, &cfg)?;

    for (name, a) in [("csd", &r), ("eigenvectors", &evd.q), ("eigenvalues", &evd.lambda), ("noise_subspace", &q_perp)] {
        let path = dir.join(format!("{name}.txt"));
        a.write_text(std::fs::File::create(&path)?)?;
        let back = LaurentMatrix::read_text(std::io::BufReader::new(std::fs::File::open(&path)?))?;
        let err = back.sub(a)?.energy().sqrt() / a.energy().sqrt();
        println!("{:<50} {:>2}x{:<2} lags {:>4}..={:<4} round-trip error {err:.1e}", path.display(), a.rows(), a.cols(), a.tau_min(), a.tau_max());
    }
    Ok(())
}
