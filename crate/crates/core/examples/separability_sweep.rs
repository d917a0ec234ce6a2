//! A reduced detection experiment: every method across window lengths, written as CSV.
//!
//! cargo run --release --example separability_sweep > sweep.csv

use subspace_lrt::experiments::{run_experiment, write_csv};
use subspace_lrt::signalgen::ScenarioConfig;

fn main() -> subspace_lrt::Result<()> {
    let mut cfg = ScenarioConfig::reference(4, 10.0);
    cfg.num_snapshots = 20_000;
    cfg.num_trials = 2_000;
    cfg.t_range = vec![1, 2, 4, 6];
    let records = run_experiment(&cfg)?;
    for r in &records {
        eprintln!("{:<8} T={:<2} delta {:6.3}  cond {:9.2} / {:9.2}", r.method.as_str(), r.t, r.delta, r.cond_h0, r.cond_h1);
    }
    write_csv(std::io::stdout().lock(), &cfg, &records)
}
