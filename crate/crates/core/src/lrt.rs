//! Likelihood-ratio detection of a low-rank covariance change.
//!
//! Under the two Gaussian hypotheses `y ~ CN(0, R0)` and `y ~ CN(0, R0 + R1)` the
//! log-likelihood ratio depends on the data only through `y^H A y` with
//! `A = R0^{-1} - (R0 + R1)^{-1}`. The detector stores a whitener `W` with
//! `W^H W = A`, so the statistic is `||W y||`; a large value favours the transient.

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, CVector};
use crate::polymat::LaurentMatrix;
use crate::signalgen::{ScenarioConfig, SourceModel};

/// Eigenvalues of `A` below this fraction of the largest are treated as zero.
pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-12;

/// Condition numbers above this are reported as [`Error::IllConditioned`].
pub fn ill_conditioning_limit() -> f64 {
    1e-3 / f64::EPSILON
}

/// Quadratic detector for one window length.
#[derive(Debug, Clone)]
pub struct LrtDetector {
    /// `K' x K` whitener, rows `sqrt(lambda_k) q_k^H`.
    pub whitener: CMatrix,
    /// `A = R0^{-1} - R01^{-1}`.
    pub a: CMatrix,
    pub logdet_r0: f64,
    pub logdet_r01: f64,
    pub cond_r0: f64,
    pub cond_r01: f64,
}

impl LrtDetector {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `||W y||`.
    ///
    /// # Panics
    /// If `y` does not have [`dim`](Self::dim) entries.
    pub fn statistic(&self, y: &CVector) -> f64 {
        assert_eq!(y.len(), self.dim(), "test vector length");
        (&self.whitener * y).norm()
    }
}

/// See [`LrtDetector::statistic`].
pub fn test_statistic(det: &LrtDetector, y: &CVector) -> f64 {
    det.statistic(y)
}

/// `[x[n]; x[n-1]; ...; x[n-T+1]]`, newest snapshot on top.
pub fn stack_snapshots(stream: &CMatrix, n: usize, t: usize) -> Result<CVector> {
    let d = stream.nrows();
    if t == 0 || n + 1 < t || n >= stream.ncols() {
        return Err(Error::InvalidArgument(format!(
            "window of {t} snapshots ending at {n} does not fit a stream of {}",
            stream.ncols()
        )));
    }
    let mut y = CVector::zeros(d * t);
    for i in 0..t {
        y.rows_mut(i * d, d).copy_from(&stream.column(n - i));
    }
    Ok(y)
}

fn check_square(a: &CMatrix, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.nrows() == 0 {
        return Err(Error::InvalidArgument(format!("{what} is empty")));
    }
    Ok(())
}

fn check_hermitian(a: &CMatrix, what: &str) -> Result<()> {
    check_square(a, what)?;
    let dev = linalg::frobenius(&(a - a.adjoint()));
    if dev > 1e-10 * linalg::frobenius(a).max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument(format!("{what} is not Hermitian (deviation {dev:e})")));
    }
    Ok(())
}

fn conditioning(r0: &CMatrix, r01: &CMatrix, checked: bool) -> Result<(f64, f64)> {
    let (c0, c01) = (linalg::condition_number(r0), linalg::condition_number(r01));
    let worst = c0.max(c01);
    if checked && (worst.is_nan() || worst > ill_conditioning_limit()) {
        return Err(Error::IllConditioned(worst));
    }
    Ok((c0, c01))
}

/// A solve failed outright: the matrix is exactly singular.
fn singular() -> Error {
    Error::IllConditioned(f64::INFINITY)
}

/// Hermitian EVD of `A`, keeping eigenpairs above `floor` times the largest eigenvalue.
fn whiten(a: CMatrix, eigen_floor: f64, logdets: (f64, f64), conds: (f64, f64)) -> LrtDetector {
    let a = linalg::hermitian_part(&a);
    let k = a.nrows();
    let (vals, vecs) = linalg::hermitian_eig_desc(&a);
    let top = vals.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..k).filter(|&i| top > 0.0 && vals[i] > eigen_floor * top).collect();
    let mut whitener = CMatrix::zeros(keep.len(), k);
    for (row, &i) in keep.iter().enumerate() {
        let scaled = vecs.column(i).adjoint() * c64(vals[i].sqrt(), 0.0);
        whitener.set_row(row, &scaled);
    }
    LrtDetector { whitener, a, logdet_r0: logdets.0, logdet_r01: logdets.1, cond_r0: conds.0, cond_r01: conds.1 }
}

fn direct(r0: &CMatrix, r01: &CMatrix, eigen_floor: f64, checked: bool) -> Result<LrtDetector> {
    check_hermitian(r0, "R0")?;
    check_hermitian(r01, "R0 + R1")?;
    if r0.shape() != r01.shape() {
        return Err(Error::DimensionMismatch(format!("R0 is {:?} but R0 + R1 is {:?}", r0.shape(), r01.shape())));
    }
    let conds = conditioning(r0, r01, checked)?;
    // A = R0^{-1} (R01 - R0) R01^{-1}, assembled from two solves
    let r1 = r01 - r0;
    let x = linalg::solve(r0, &r1).ok_or_else(singular)?;
    let a = linalg::solve(r01, &x.adjoint()).ok_or_else(singular)?.adjoint();
    let logdets = (linalg::log_abs_det(r0), linalg::log_abs_det(r01));
    Ok(whiten(a, eigen_floor, logdets, conds))
}

/// Detector for `R0` against `R01 = R0 + R1`.
///
/// `R01 - R0` is expected to be positive semi-definite but this is not enforced: with
/// estimated covariances the difference is indefinite and the eigen floor then drops the
/// negative part of `A`.
pub fn build_detector(r0: &CMatrix, r01: &CMatrix, eigen_floor: f64) -> Result<LrtDetector> {
    direct(r0, r01, eigen_floor, true)
}

/// [`build_detector`] without the ill-conditioning error; the solves still fail on an
/// exactly singular matrix.
pub fn build_detector_unchecked(r0: &CMatrix, r01: &CMatrix, eigen_floor: f64) -> Result<LrtDetector> {
    direct(r0, r01, eigen_floor, false)
}

/// Low-rank transient covariance `R1 = H_t H_t^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientFactor {
    /// `K x r` factor.
    pub h: CMatrix,
}

impl TransientFactor {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn rank_bound(&self) -> usize {
        self.h.ncols()
    }

    pub fn gram(&self) -> CMatrix {
        &self.h * self.h.adjoint()
    }
}

/// Column `j` of the stacking matrix: block `i` holds `sigma_t h[j + first - i]`, i.e.
/// the contribution of the transient innovation `u[n - j - first]` to `x[n - i]`.
fn stacking_columns(h_t: &LaurentMatrix, t: usize, sigma_t: f64, first: i64, count: usize) -> CMatrix {
    let d = h_t.rows();
    let mut out = CMatrix::zeros(d * t, count);
    for j in 0..count {
        for i in 0..t {
            let lag = j as i64 + first - i as i64;
            if let Some(c) = h_t.coeff(lag) {
                out.view_mut((i * d, j), (d, 1)).copy_from(&(c * c64(sigma_t, 0.0)));
            }
        }
    }
    out
}

fn check_column(h_t: &LaurentMatrix, t: usize) -> Result<()> {
    if h_t.cols() != 1 {
        return Err(Error::DimensionMismatch(format!("transient filter must be a column, got {} columns", h_t.cols())));
    }
    if t == 0 {
        return Err(Error::InvalidArgument("temporal window must be at least 1".into()));
    }
    Ok(())
}

/// Rank-`T` factor: the `T` innovation samples that carry the most energy into a window
/// of `T` snapshots. Exact when the filter has a single tap; otherwise the innovation
/// samples straddling the window edges are left out.
pub fn transient_factor(h_t: &LaurentMatrix, t: usize, sigma_t: f64) -> Result<TransientFactor> {
    check_column(h_t, t)?;
    let order = h_t.order();
    let full = stacking_columns(h_t, t, sigma_t, h_t.tau_min(), t + order);
    let energies: Vec<f64> = full.column_iter().map(|c| c.norm_squared()).collect();
    let best = (0..=order)
        .max_by(|&a, &b| {
            let ea: f64 = energies[a..a + t].iter().sum();
            let eb: f64 = energies[b..b + t].iter().sum();
            ea.total_cmp(&eb).then(b.cmp(&a))
        })
        .unwrap_or(0);
    Ok(TransientFactor { h: full.columns(best, t).into_owned() })
}

/// Exact factor with `T + order` columns: its Gram matrix equals the block-Toeplitz
/// covariance of `sigma_t^2 h_t(z) h_t^P(z)`.
pub fn transient_factor_full(h_t: &LaurentMatrix, t: usize, sigma_t: f64) -> Result<TransientFactor> {
    check_column(h_t, t)?;
    Ok(TransientFactor { h: stacking_columns(h_t, t, sigma_t, h_t.tau_min(), t + h_t.order()) })
}

fn woodbury(r0: &CMatrix, ht: &TransientFactor, eigen_floor: f64, checked: bool) -> Result<LrtDetector> {
    check_hermitian(r0, "R0")?;
    if ht.dim() != r0.nrows() {
        return Err(Error::DimensionMismatch(format!("factor has {} rows, R0 is {}", ht.dim(), r0.nrows())));
    }
    let h = &ht.h;
    let r01 = r0 + ht.gram();
    let conds = conditioning(r0, &r01, checked)?;
    let g = linalg::solve(r0, h).ok_or_else(singular)?;
    let inner = CMatrix::identity(h.ncols(), h.ncols()) + h.adjoint() * &g;
    let a = &g * linalg::solve(&inner, &g.adjoint()).ok_or_else(singular)?;
    let logdet_r0 = linalg::log_abs_det(r0);
    // determinant lemma: |R0 + H H^H| = |R0| |I + H^H R0^{-1} H|
    let logdets = (logdet_r0, logdet_r0 + linalg::log_abs_det(&inner));
    Ok(whiten(a, eigen_floor, logdets, conds))
}

/// Detector for `R0` against `R0 + H_t H_t^H` using only `r x r` inner solves.
pub fn build_detector_woodbury(r0: &CMatrix, ht: &TransientFactor) -> Result<LrtDetector> {
    woodbury(r0, ht, DEFAULT_EIGEN_FLOOR, true)
}

/// Closed form for white noise `R0 = sigma_v2 I`:
/// `A = H (sigma_v2 I + H^H H)^{-1} H^H / sigma_v2`.
pub fn build_detector_white(sigma_v2: f64, ht: &TransientFactor) -> Result<LrtDetector> {
    if sigma_v2.is_nan() || sigma_v2 <= 0.0 {
        return Err(Error::InvalidArgument(format!("noise variance must be positive, got {sigma_v2}")));
    }
    let h = &ht.h;
    let k = ht.dim();
    let r = h.ncols();
    let inner = CMatrix::identity(r, r) * c64(sigma_v2, 0.0) + h.adjoint() * h;
    let a = h * linalg::solve(&inner, &h.adjoint()).ok_or_else(singular)? * c64(1.0 / sigma_v2, 0.0);
    let r01 = CMatrix::identity(k, k) * c64(sigma_v2, 0.0) + ht.gram();
    let logdet_r0 = k as f64 * sigma_v2.ln();
    let logdets = (logdet_r0, logdet_r0 + linalg::log_abs_det(&(&inner * c64(1.0 / sigma_v2, 0.0))));
    Ok(whiten(a, DEFAULT_EIGEN_FLOOR, logdets, (1.0, linalg::condition_number(&r01))))
}

/// Lower bounds on covariance condition numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionBounds {
    /// `sigma_s^2 / sigma_v^2`, bounding the measurement covariance under either hypothesis.
    pub measurement: f64,
    /// The noise-only subspace is white under H0, so its condition number exceeds 1 only
    /// through estimation error.
    pub subspace_h0: f64,
    /// `(sigma_t^2 + sigma_v^2) / sigma_v^2` with `sigma_t^2` the largest per-sensor
    /// transient power.
    pub subspace_h1: f64,
}

pub fn condition_bounds(model: &SourceModel, config: &ScenarioConfig) -> ConditionBounds {
    let v = config.sigma_v2;
    ConditionBounds { measurement: model.sigma_s2() / v, subspace_h0: 1.0, subspace_h1: (model.sigma_t2_max() + v) / v }
}
