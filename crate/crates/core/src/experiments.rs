//! Monte-Carlo comparison of measurement-domain and subspace-domain detectors.
//!
//! For every window length `T` five detectors are evaluated on the same test streams:
//!
//! | method   | data                | covariances                                 |
//! |----------|---------------------|---------------------------------------------|
//! | `lrt_x`  | measurements, `MT`  | ground truth                                |
//! | `lrt_s`  | syndromes, `(M-L)T` | ground truth, projected with the true PEVD  |
//! | `glrt_x` | measurements        | estimated from H0 and H1 training runs      |
//! | `glrt_s` | syndromes           | estimated, projected with an estimated PEVD |
//! | `power_s`| syndromes           | none: average syndrome power                |

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::covariance::{block_toeplitz, estimate_csd, projected_csd};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::lrt::{build_detector, build_detector_unchecked, LrtDetector, DEFAULT_EIGEN_FLOOR};
use crate::pevd::{partition, pevd, AnalyticEvd, PevdOptions};
use crate::polymat::LaurentMatrix;
use crate::projection::{project, SyndromeStream};
use crate::signalgen::{build_mixing_system, generate_measurements, ground_truth_csd, substream, ScenarioConfig, SourceModel};

/// Column names of the results file, in order.
pub const CSV_COLUMNS: [&str; 7] = ["method", "T", "delta", "cond_H0", "cond_H1", "status", "wall_time_ms"];

/// PEVD settings used when the scenario leaves them open.
pub const DEFAULT_PEVD_RESIDUAL_TOL: f64 = 5e-5;
pub const DEFAULT_PEVD_MAX_ITER: usize = 10_000;

// sub-stream tags
const TAG_MODEL: u64 = 1;
const TAG_TRAIN: u64 = 2;
const TAG_TEST: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    LrtX,
    LrtS,
    GlrtX,
    GlrtS,
    PowerS,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::LrtX, Method::LrtS, Method::GlrtX, Method::GlrtS, Method::PowerS];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::LrtX => "lrt_x",
            Method::LrtS => "lrt_s",
            Method::GlrtX => "glrt_x",
            Method::GlrtS => "glrt_s",
            Method::PowerS => "power_s",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method {s:?}")))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    IllConditioned,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::IllConditioned => "ill_conditioned",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(Status::Ok),
            "ill_conditioned" => Ok(Status::IllConditioned),
            _ => Err(Error::Parse(format!("unknown status {s:?}"))),
        }
    }
}

/// One `(method, T)` cell of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub method: Method,
    pub t: usize,
    /// Separability of the statistic under the two hypotheses; NaN if the detector could
    /// not be built at all.
    pub delta: f64,
    pub cond_h0: f64,
    pub cond_h1: f64,
    pub status: Status,
    pub wall_time_ms: f64,
}

/// `|mu1 - mu0| / ((sigma0 + sigma1) / 2)` with unbiased standard deviations.
///
/// Two constant samples give 0 when their means agree and infinity otherwise.
pub fn separability(stats_h0: &[f64], stats_h1: &[f64]) -> Result<f64> {
    if stats_h0.len() < 2 || stats_h1.len() < 2 {
        return Err(Error::InvalidArgument("separability needs at least two samples per hypothesis".into()));
    }
    let moments = |x: &[f64]| {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt())
    };
    let (mu0, sd0) = moments(stats_h0);
    let (mu1, sd1) = moments(stats_h1);
    let gap = (mu1 - mu0).abs();
    let spread = 0.5 * (sd0 + sd1);
    Ok(if spread == 0.0 {
        if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        gap / spread
    })
}

/// Mean of `||s[m - i]||^2` over `i = 0..T`, where `m` indexes syndrome columns.
pub fn power_statistic(stream: &SyndromeStream, m: usize, t: usize) -> Result<f64> {
    if t == 0 || m + 1 < t || m >= stream.len() {
        return Err(Error::InvalidArgument(format!(
            "power window of {t} ending at {m} does not fit {} syndrome samples",
            stream.len()
        )));
    }
    Ok((0..t).map(|i| stream.data.column(m - i).norm_squared()).sum::<f64>() / t as f64)
}

/// Decomposition settings for `config`, falling back to the defaults above.
pub fn pevd_options(config: &ScenarioConfig) -> PevdOptions {
    PevdOptions {
        max_iter: config.pevd_max_iter.unwrap_or(DEFAULT_PEVD_MAX_ITER),
        residual_tol: config.pevd_residual_tol.unwrap_or(DEFAULT_PEVD_RESIDUAL_TOL),
        ..PevdOptions::default()
    }
}

/// Noise-only eigenvectors of `r`, with boundary lags holding less than the PEVD's
/// truncation threshold of energy removed.
pub fn noise_subspace(r: &LaurentMatrix, config: &ScenarioConfig) -> Result<(AnalyticEvd, LaurentMatrix)> {
    let opts = pevd_options(config);
    let evd = pevd(r, &opts)?;
    let q_perp = partition(&evd, config.l)?.q_perp.truncate(opts.trunc_eps);
    Ok((evd, q_perp))
}

/// The scenario's source model, drawn from the seed's model sub-stream.
pub fn build_model(config: &ScenarioConfig) -> Result<SourceModel> {
    build_mixing_system(config, &mut substream(config.seed, &[TAG_MODEL]))
}

/// A pair of streams, one per hypothesis.
#[derive(Debug, Clone)]
pub struct StreamPair {
    pub h0: CMatrix,
    pub h1: CMatrix,
}

impl StreamPair {
    fn generate(model: &SourceModel, config: &ScenarioConfig, n: usize, tag: u64) -> Self {
        Self {
            h0: generate_measurements(model, config, false, n, &mut substream(config.seed, &[tag, 0])),
            h1: generate_measurements(model, config, true, n, &mut substream(config.seed, &[tag, 1])),
        }
    }

    fn project(&self, q_perp: &LaurentMatrix) -> Result<(SyndromeStream, SyndromeStream)> {
        Ok((project(q_perp, &self.h0)?, project(q_perp, &self.h1)?))
    }
}

/// Everything an experiment derives once, before sweeping `T`.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub model: SourceModel,
    /// Ground-truth CSD under H0 and the transient's contribution under H1.
    pub r: LaurentMatrix,
    pub r_t: LaurentMatrix,
    /// Noise-only subspace of the ground truth.
    pub q_perp: LaurentMatrix,
    /// Noise-only subspace of the CSD estimated from H0 training data.
    pub q_perp_est: LaurentMatrix,
    pub train: StreamPair,
    pub test: StreamPair,
    train_s: (SyndromeStream, SyndromeStream),
    test_s: (SyndromeStream, SyndromeStream),
    test_s_est: (SyndromeStream, SyndromeStream),
    /// First measurement index at which every syndrome stream is defined.
    lead: usize,
}

impl Scenario {
    pub fn prepare(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let model = build_model(config)?;
        let (r, r_t) = ground_truth_csd(&model, config.sigma_v2);
        let (_, q_perp) = noise_subspace(&r, config)?;

        let train = StreamPair::generate(&model, config, config.num_snapshots, TAG_TRAIN);
        let r_est = estimate_csd(&train.h0, config.max_lag())?;
        let (_, q_perp_est) = noise_subspace(&r_est, config)?;
        let train_s = train.project(&q_perp_est)?;

        let t_max = config.t_range.iter().copied().max().unwrap_or(1);
        let lead = q_perp.order().max(q_perp_est.order());
        let test = StreamPair::generate(&model, config, lead + config.num_trials * t_max, TAG_TEST);
        let test_s = test.project(&q_perp)?;
        let test_s_est = test.project(&q_perp_est)?;
        Ok(Self { config: config.clone(), model, r, r_t, q_perp, q_perp_est, train, test, train_s, test_s, test_s_est, lead })
    }

    /// Measurement indices closing the disjoint length-`t` test windows.
    fn window_ends(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.config.num_trials).map(move |i| self.lead + i * t + t - 1)
    }

    /// Ground-truth block-Toeplitz covariances `(R0, R0 + R1)` for one domain.
    fn true_covariances(&self, t: usize, subspace: bool) -> Result<(CMatrix, CMatrix)> {
        let (r0, r1) = if subspace {
            (projected_csd(&self.r, &self.q_perp)?, projected_csd(&self.r_t, &self.q_perp)?)
        } else {
            (self.r.clone(), self.r_t.clone())
        };
        let r01 = r0.add(&r1)?;
        Ok((block_toeplitz(&r0, t)?.matrix, block_toeplitz(&r01, t)?.matrix))
    }

    /// Block-Toeplitz covariances estimated from the H0 and H1 training runs.
    fn estimated_covariances(&self, t: usize, subspace: bool) -> Result<(CMatrix, CMatrix)> {
        let (d0, d1) = if subspace { (&self.train_s.0.data, &self.train_s.1.data) } else { (&self.train.h0, &self.train.h1) };
        let r0 = estimate_csd(d0, t - 1)?;
        let r01 = estimate_csd(d1, t - 1)?;
        Ok((block_toeplitz(&r0, t)?.matrix, block_toeplitz(&r01, t)?.matrix))
    }

    /// Stacked test vectors as the columns of one matrix.
    fn stacked(&self, data: &CMatrix, offset: usize, t: usize) -> CMatrix {
        let d = data.nrows();
        let ends: Vec<usize> = self.window_ends(t).collect();
        let mut out = CMatrix::zeros(d * t, ends.len());
        for (c, &n) in ends.iter().enumerate() {
            let n = n - offset;
            for i in 0..t {
                out.view_mut((i * d, c), (d, 1)).copy_from(&data.column(n - i));
            }
        }
        out
    }

    fn quadratic_statistics(&self, det: &LrtDetector, t: usize, domain: Domain) -> (Vec<f64>, Vec<f64>) {
        let stats = |data: &CMatrix, offset: usize| -> Vec<f64> {
            let proj = &det.whitener * self.stacked(data, offset, t);
            proj.column_iter().map(|c| c.norm()).collect()
        };
        match domain {
            Domain::Measurement => (stats(&self.test.h0, 0), stats(&self.test.h1, 0)),
            Domain::TrueSubspace => {
                (stats(&self.test_s.0.data, self.test_s.0.valid_from), stats(&self.test_s.1.data, self.test_s.1.valid_from))
            }
            Domain::EstimatedSubspace => (
                stats(&self.test_s_est.0.data, self.test_s_est.0.valid_from),
                stats(&self.test_s_est.1.data, self.test_s_est.1.valid_from),
            ),
        }
    }

    fn power_statistics(&self, t: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let run = |s: &SyndromeStream| -> Result<Vec<f64>> {
            self.window_ends(t).map(|n| power_statistic(s, n - s.valid_from, t)).collect()
        };
        Ok((run(&self.test_s.0)?, run(&self.test_s.1)?))
    }

    /// Evaluates one `(method, T)` cell.
    pub fn evaluate(&self, method: Method, t: usize) -> Result<ExperimentRecord> {
        let start = Instant::now();
        let (covs, domain) = match method {
            Method::LrtX => (self.true_covariances(t, false)?, Domain::Measurement),
            Method::LrtS | Method::PowerS => (self.true_covariances(t, true)?, Domain::TrueSubspace),
            Method::GlrtX => (self.estimated_covariances(t, false)?, Domain::Measurement),
            Method::GlrtS => (self.estimated_covariances(t, true)?, Domain::EstimatedSubspace),
        };
        let (r0, r01) = covs;
        let (stats, status, conds) = if method == Method::PowerS {
            let conds = (linalg::condition_number(&r0), linalg::condition_number(&r01));
            (Some(self.power_statistics(t)?), Status::Ok, conds)
        } else {
            let (det, status) = match build_detector(&r0, &r01, DEFAULT_EIGEN_FLOOR) {
                Ok(det) => (Ok(det), Status::Ok),
                Err(Error::IllConditioned(_)) => (build_detector_unchecked(&r0, &r01, DEFAULT_EIGEN_FLOOR), Status::IllConditioned),
                Err(e) => return Err(e),
            };
            match det {
                Ok(det) => {
                    let conds = (det.cond_r0, det.cond_r01);
                    (Some(self.quadratic_statistics(&det, t, domain)), status, conds)
                }
                Err(Error::IllConditioned(_)) => {
                    let conds = (linalg::condition_number(&r0), linalg::condition_number(&r01));
                    (None, Status::IllConditioned, conds)
                }
                Err(e) => return Err(e),
            }
        };
        let delta = match stats {
            Some((s0, s1)) if s0.iter().chain(&s1).all(|v| v.is_finite()) => separability(&s0, &s1)?,
            _ => f64::NAN,
        };
        Ok(ExperimentRecord {
            method,
            t,
            delta,
            cond_h0: conds.0,
            cond_h1: conds.1,
            status,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum Domain {
    Measurement,
    TrueSubspace,
    EstimatedSubspace,
}

/// Every method at every `T` of the scenario, ordered by `T` then method.
pub fn run_experiment(config: &ScenarioConfig) -> Result<Vec<ExperimentRecord>> {
    let scenario = Scenario::prepare(config)?;
    run_prepared(&scenario, &Method::ALL)
}

pub fn run_prepared(scenario: &Scenario, methods: &[Method]) -> Result<Vec<ExperimentRecord>> {
    let mut records = Vec::new();
    for &t in &scenario.config.t_range {
        for &m in methods {
            records.push(scenario.evaluate(m, t)?);
        }
    }
    Ok(records)
}

fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v}")
    }
}

/// Writes the results with `#` comment lines echoing the configuration and seed.
pub fn write_csv<W: Write>(mut out: W, config: &ScenarioConfig, records: &[ExperimentRecord]) -> Result<()> {
    writeln!(out, "# seed = {}", config.seed)?;
    for line in config.to_toml_string().lines().filter(|l| !l.trim().is_empty()) {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.method.as_str().to_string(),
            r.t.to_string(),
            format_float(r.delta),
            format_float(r.cond_h0),
            format_float(r.cond_h1),
            r.status.as_str().to_string(),
            format!("{:.3}", r.wall_time_ms),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a results file written by [`write_csv`], skipping comment lines.
pub fn read_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Parse(format!("unexpected columns {:?}", header.iter().collect::<Vec<_>>())));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
    rd.records()
        .map(|row| {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            Ok(ExperimentRecord {
                method: Method::parse(&row[0])?,
                t: row[1].parse().map_err(|e| Error::Parse(format!("T {:?}: {e}", &row[1])))?,
                delta: num(&row[2])?,
                cond_h0: num(&row[3])?,
                cond_h1: num(&row[4])?,
                status: Status::parse(&row[5])?,
                wall_time_ms: num(&row[6])?,
            })
        })
        .collect()
}

/// Runs `config` and writes the CSV to `path`.
pub fn run_to_csv(config: &ScenarioConfig, path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let records = run_experiment(config)?;
    let file = std::fs::File::create(path)?;
    write_csv(std::io::BufWriter::new(file), config, &records)?;
    Ok(records)
}

/// J = 10 with the transient 10 dB below the stationary sources.
pub fn figure3_config() -> ScenarioConfig {
    ScenarioConfig::reference(10, 10.0)
}

/// J = 20 with the transient 20 dB below the stationary sources.
pub fn figure2_config() -> ScenarioConfig {
    ScenarioConfig::reference(20, 20.0)
}
