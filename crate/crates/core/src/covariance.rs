//! Space-time covariance estimation, projected CSDs and block-Toeplitz assembly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::polymat::LaurentMatrix;

/// Stacked covariance of `T` consecutive snapshots of a `block_dim`-channel process.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockToeplitzCov {
    pub t: usize,
    pub block_dim: usize,
    /// `(block_dim T) x (block_dim T)` Hermitian matrix.
    pub matrix: CMatrix,
}

impl BlockToeplitzCov {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Block `(i, j)`.
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let d = self.block_dim;
        self.matrix.view((i * d, j * d), (d, d)).into_owned()
    }
}

/// Unbiased lag-windowed estimate `R[tau] = 1/(N-tau) sum_n x[n] x^H[n-tau]` for
/// `0 <= tau <= max_lag`, mirrored to negative lags as `R[-tau] = R[tau]^H`.
pub fn estimate_csd(data: &CMatrix, max_lag: usize) -> Result<LaurentMatrix> {
    let (m, n) = data.shape();
    if max_lag >= n {
        return Err(Error::InvalidArgument(format!(
            "max_lag {max_lag} requires more than {n} samples"
        )));
    }
    let x = data.as_slice();
    let mut positive = Vec::with_capacity(max_lag + 1);
    for tau in 0..=max_lag {
        let mut acc = vec![Complex64::new(0.0, 0.0); m * m];
        for t in tau..n {
            let now = &x[t * m..(t + 1) * m];
            let past = &x[(t - tau) * m..(t - tau + 1) * m];
            // column-major: acc[(i, k)] at k * m + i
            for (k, pk) in past.iter().enumerate() {
                let pk = pk.conj();
                let col = &mut acc[k * m..(k + 1) * m];
                for (a, &xi) in col.iter_mut().zip(now) {
                    *a += xi * pk;
                }
            }
        }
        let scale = 1.0 / (n - tau) as f64;
        positive.push(CMatrix::from_vec(m, m, acc.into_iter().map(|z| z * scale).collect()));
    }
    // lag zero is made exactly Hermitian
    positive[0] = linalg::hermitian_part(&positive[0]);
    let mut coeffs: Vec<CMatrix> = positive[1..].iter().rev().map(|c| c.adjoint()).collect();
    coeffs.extend(positive);
    LaurentMatrix::new(-(max_lag as i64), coeffs)
}

/// Block `(i, j)` of the result is `R[j - i]`, so the first block row reads
/// `R[0], R[1], ..., R[T-1]`. Lags outside the stored range contribute zero blocks.
pub fn block_toeplitz(r: &LaurentMatrix, t: usize) -> Result<BlockToeplitzCov> {
    if !r.is_square() {
        return Err(Error::NotSquare { rows: r.rows(), cols: r.cols() });
    }
    if t == 0 {
        return Err(Error::InvalidArgument("temporal window must be at least 1".into()));
    }
    let d = r.rows();
    let mut matrix = CMatrix::zeros(d * t, d * t);
    for i in 0..t {
        for j in 0..t {
            if let Some(c) = r.coeff(j as i64 - i as i64) {
                matrix.view_mut((i * d, j * d), (d, d)).copy_from(c);
            }
        }
    }
    Ok(BlockToeplitzCov { t, block_dim: d, matrix })
}

/// `Q_perp^P(z) R(z) Q_perp(z)`: the CSD seen after projecting onto `Q_perp`.
pub fn projected_csd(r: &LaurentMatrix, q_perp: &LaurentMatrix) -> Result<LaurentMatrix> {
    if !r.is_square() {
        return Err(Error::NotSquare { rows: r.rows(), cols: r.cols() });
    }
    if q_perp.rows() != r.rows() {
        return Err(Error::DimensionMismatch(format!(
            "projection with {} rows applied to a {}x{} CSD",
            q_perp.rows(),
            r.rows(),
            r.cols()
        )));
    }
    q_perp.paraconjugate().multiply(&r.multiply(q_perp)?)
}

/// Ratio of the extreme singular values, `f64::INFINITY` for a singular matrix.
pub fn condition_number(a: &CMatrix) -> f64 {
    linalg::condition_number(a)
}
