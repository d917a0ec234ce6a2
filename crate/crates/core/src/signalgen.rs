//! Scenario configuration, ground-truth source models and synthetic array data.
//!
//! `L` unit-variance white sources are shaped by innovation filters and mixed onto
//! `M` sensors by the first `L` columns of a random paraunitary system. A transient
//! source reaches the array through its own filter vector `h_t(z)`. Complex Gaussian
//! noise of variance `sigma_v2` is added at every sensor.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix};
use crate::polymat::LaurentMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Number of sensors.
    #[serde(rename = "M")]
    pub m: usize,
    /// Number of stationary sources.
    #[serde(rename = "L")]
    pub l: usize,
    /// Order of the stationary mixing system.
    #[serde(rename = "J")]
    pub j: usize,
    pub snr_db: f64,
    /// Transient power deficit against the stationary sources, in dB. `inf` disables the
    /// transient.
    pub transient_db_below: f64,
    pub sigma_v2: f64,
    pub num_snapshots: usize,
    #[serde(rename = "T_range")]
    pub t_range: Vec<usize>,
    pub num_trials: usize,
    pub seed: u64,
    /// Order of the innovation filters; defaults to `min(4, J)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub innovation_order: Option<usize>,
    /// Order of the transient steering filters; defaults to `J`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transient_order: Option<usize>,
    /// Largest lag of the estimated space-time covariance; defaults to `2 J`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_lag: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pevd_residual_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pevd_max_iter: Option<usize>,
}

impl ScenarioConfig {
    /// M=10 sensors, L=7 sources, 20 dB SNR, unit noise power; `J` and the transient
    /// deficit select between the two standard scenarios.
    pub fn reference(j: usize, transient_db_below: f64) -> Self {
        Self {
            m: 10,
            l: 7,
            j,
            snr_db: 20.0,
            transient_db_below,
            sigma_v2: 1.0,
            num_snapshots: 100_000,
            t_range: (1..=10).collect(),
            num_trials: 10_000,
            seed: 1,
            innovation_order: None,
            transient_order: None,
            max_lag: None,
            pevd_residual_tol: None,
            pevd_max_iter: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.l == 0 || self.m <= self.l {
            return fail(format!("need M > L >= 1, got M={} L={}", self.m, self.l));
        }
        if self.num_snapshots == 0 {
            return fail("num_snapshots must be positive".into());
        }
        if self.t_range.is_empty() || self.t_range.contains(&0) {
            return fail("T_range must be non-empty with every T >= 1".into());
        }
        if self.num_trials < 2 {
            return fail("num_trials must be at least 2".into());
        }
        if !(self.sigma_v2 > 0.0 && self.sigma_v2.is_finite()) {
            return fail("sigma_v2 must be positive and finite".into());
        }
        if !self.snr_db.is_finite() {
            return fail("snr_db must be finite".into());
        }
        if self.transient_db_below.is_nan() || self.transient_db_below == f64::NEG_INFINITY {
            return fail("transient_db_below must be a number or +inf".into());
        }
        if let Some(jd) = self.innovation_order {
            if jd > self.j {
                return fail(format!("innovation_order {jd} exceeds J={}", self.j));
            }
        }
        if let Some(tol) = self.pevd_residual_tol {
            if tol.is_nan() || tol < 0.0 {
                return fail("pevd_residual_tol must be non-negative".into());
            }
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn innovation_order(&self) -> usize {
        self.innovation_order.unwrap_or(self.j.min(4)).min(self.j)
    }

    pub fn transient_order(&self) -> usize {
        self.transient_order.unwrap_or(self.j)
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag.unwrap_or(2 * self.j)
    }

    /// Average per-sensor stationary power implied by the SNR.
    pub fn stationary_power(&self) -> f64 {
        self.sigma_v2 * 10f64.powf(self.snr_db / 10.0)
    }
}

/// Ground-truth generating system for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    /// `M x L` stationary mixing system (includes the innovation filters).
    pub h: LaurentMatrix,
    /// `M x 1` unit-energy transient steering filters.
    pub h_t: LaurentMatrix,
    /// Variance of the transient source.
    pub sigma_t2: f64,
}

impl SourceModel {
    pub fn num_sensors(&self) -> usize {
        self.h.rows()
    }

    pub fn num_sources(&self) -> usize {
        self.h.cols()
    }

    /// Stationary power at each sensor, excluding noise.
    pub fn stationary_power_per_sensor(&self) -> Vec<f64> {
        row_energies(&self.h)
    }

    /// Transient power at each sensor when the transient is active.
    pub fn transient_power_per_sensor(&self) -> Vec<f64> {
        row_energies(&self.h_t).into_iter().map(|p| p * self.sigma_t2).collect()
    }

    /// Largest per-sensor stationary power.
    pub fn sigma_s2(&self) -> f64 {
        self.stationary_power_per_sensor().into_iter().fold(0.0, f64::max)
    }

    /// Largest per-sensor transient power.
    pub fn sigma_t2_max(&self) -> f64 {
        self.transient_power_per_sensor().into_iter().fold(0.0, f64::max)
    }
}

fn row_energies(a: &LaurentMatrix) -> Vec<f64> {
    (0..a.rows())
        .map(|r| a.coeffs().iter().map(|c| c.row(r).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum())
        .collect()
}

/// Deterministic sub-stream for `(seed, tags...)`.
pub fn substream(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = splitmix(seed);
    for &t in tags {
        state = splitmix(state ^ splitmix(t.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    ChaCha8Rng::seed_from_u64(state)
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draw from CN(0, variance): real and imaginary parts each carry half the variance.
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(s * re, s * im)
}

fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng, 1.0));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    // Phase fix keeps the draw Haar-distributed.
    for k in 0..dim {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            let mut col = q.column_mut(k);
            col *= ph;
        }
    }
    q
}

fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let v = CMatrix::from_fn(dim, 1, |_, _| complex_normal(rng, 1.0));
    let n = v.norm();
    v / c64(n, 0.0)
}

/// Random `dim x dim` paraunitary matrix of exactly the given order: a constant unitary
/// followed by `order` elementary factors `I - v v^H + z^{-1} v v^H`.
pub fn random_paraunitary<R: Rng + ?Sized>(dim: usize, order: usize, rng: &mut R) -> LaurentMatrix {
    let mut q = LaurentMatrix::constant(random_unitary(rng, dim));
    for _ in 0..order {
        let v = random_unit_vector(rng, dim);
        let proj = &v * v.adjoint();
        let factor = LaurentMatrix::new(0, vec![CMatrix::identity(dim, dim) - &proj, proj])
            .expect("equal shapes");
        q = q.multiply(&factor).expect("square factors");
    }
    q
}

/// Random complex FIR filter of the given order with unit energy.
fn innovation_filter<R: Rng + ?Sized>(rng: &mut R, order: usize) -> Vec<Complex64> {
    let taps: Vec<Complex64> = (0..=order).map(|_| complex_normal(rng, 1.0)).collect();
    let norm = taps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    taps.into_iter().map(|z| z / norm).collect()
}

/// `U(z) D(z)` with `U` the first `cols` columns of a random paraunitary matrix of order
/// `order - inn_order` and `D` a diagonal of unit-energy innovation filters.
fn shaped_columns<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, order: usize, inn_order: usize) -> LaurentMatrix {
    let u = random_paraunitary(rows, order - inn_order, rng)
        .select_columns(0..cols)
        .expect("cols <= rows");
    let filters: Vec<Vec<Complex64>> = (0..cols).map(|_| innovation_filter(rng, inn_order)).collect();
    let d_coeffs = (0..=inn_order)
        .map(|k| {
            let mut c = CMatrix::zeros(cols, cols);
            for (l, f) in filters.iter().enumerate() {
                c[(l, l)] = f[k];
            }
            c
        })
        .collect();
    let d = LaurentMatrix::new(0, d_coeffs).expect("equal shapes");
    u.multiply(&d).expect("compatible shapes")
}

/// Draws the stationary mixing system and transient filters for `config`.
pub fn build_mixing_system<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<SourceModel> {
    config.validate()?;
    let (m, l, j) = (config.m, config.l, config.j);
    let jd = config.innovation_order();
    let h = shaped_columns(rng, m, l, j, jd);
    // unit-variance sources: average per-sensor power is energy(H) / M
    let gain = (config.stationary_power() * m as f64 / h.energy()).sqrt();
    let h = h.scale(c64(gain, 0.0));

    let jt = config.transient_order();
    let h_t = shaped_columns(rng, m, 1, jt, jd.min(jt));
    let h_t = h_t.scale(c64(1.0 / h_t.energy().sqrt(), 0.0));
    let ratio = 10f64.powf(-config.transient_db_below / 10.0);
    let sigma_t2 = m as f64 * ratio * config.stationary_power();
    Ok(SourceModel { h, h_t, sigma_t2 })
}

/// Filters `inputs` (a `cols x len` column-major buffer, one column per time step) by
/// `filt`, accumulating into `out` (`rows x n`). Output sample `i` uses input column
/// `i + filt.tau_max() - tau`, so `len` must be at least `n + filt.order()`.
fn accumulate_fir(filt: &LaurentMatrix, inputs: &[Complex64], out: &mut CMatrix) {
    let (rows, cols) = filt.shape();
    let n = out.ncols();
    let tau_max = filt.tau_max();
    let taps: Vec<(i64, &[Complex64])> = filt.lags().map(|(t, c)| (t, c.as_slice())).collect();
    let data = out.as_mut_slice();
    for i in 0..n {
        let acc = &mut data[i * rows..(i + 1) * rows];
        for &(tau, coeff) in &taps {
            let col = (i as i64 + tau_max - tau) as usize;
            let u = &inputs[col * cols..(col + 1) * cols];
            for (k, &uk) in u.iter().enumerate() {
                let hk = &coeff[k * rows..(k + 1) * rows];
                for (a, &h) in acc.iter_mut().zip(hk) {
                    *a += h * uk;
                }
            }
        }
    }
}

/// Simulates `n_samples` array snapshots (columns of the returned `M x n_samples` matrix).
///
/// Filters start from zero state; the first `order` outputs are discarded so the
/// returned block is stationary from its first sample.
pub fn generate_measurements<R: Rng + ?Sized>(
    model: &SourceModel,
    config: &ScenarioConfig,
    with_transient: bool,
    n_samples: usize,
    rng: &mut R,
) -> CMatrix {
    let m = model.num_sensors();
    let l = model.num_sources();
    let mut x = CMatrix::zeros(m, n_samples);

    let len = n_samples + model.h.order();
    let u: Vec<Complex64> = (0..len * l).map(|_| complex_normal(rng, 1.0)).collect();
    accumulate_fir(&model.h, &u, &mut x);

    if with_transient && model.sigma_t2 > 0.0 {
        let len = n_samples + model.h_t.order();
        let ut: Vec<Complex64> = (0..len).map(|_| complex_normal(rng, model.sigma_t2)).collect();
        accumulate_fir(&model.h_t, &ut, &mut x);
    }

    for z in x.iter_mut() {
        *z += complex_normal(rng, config.sigma_v2);
    }
    x
}

/// Ground-truth CSDs: `R(z) = H(z) H^P(z) + sigma_v2 I` and the transient's rank-one
/// contribution `R_t(z) = sigma_t2 h_t(z) h_t^P(z)`.
pub fn ground_truth_csd(model: &SourceModel, sigma_v2: f64) -> (LaurentMatrix, LaurentMatrix) {
    let m = model.num_sensors();
    let r = model
        .h
        .multiply(&model.h.paraconjugate())
        .and_then(|hh| hh.add(&LaurentMatrix::identity(m).scale(c64(sigma_v2, 0.0))))
        .expect("square by construction");
    let r_t = model
        .h_t
        .multiply(&model.h_t.paraconjugate())
        .expect("compatible shapes")
        .scale(c64(model.sigma_t2, 0.0));
    (r, r_t)
}
