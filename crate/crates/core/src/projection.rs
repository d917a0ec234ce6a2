//! Projection of array data onto the noise-only subspace.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::polymat::LaurentMatrix;

/// Syndrome vectors `s[n]`, one per column.
#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeStream {
    pub data: CMatrix,
    /// Input sample index aligned with the first output column: output column `m` is the
    /// syndrome whose newest contributing input sample is `m + valid_from`.
    pub valid_from: usize,
}

impl SyndromeStream {
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    /// Output column aligned with input sample `n`, if it exists.
    pub fn index_of_input(&self, n: usize) -> Option<usize> {
        n.checked_sub(self.valid_from).filter(|&m| m < self.len())
    }
}

/// Filters `x` (`M x N`) through the paraconjugate of `q_perp`:
/// `s[n] = sum_nu Q_perp^H[-nu] x[n - nu]`.
///
/// The filter is made causal by a delay of `q_perp.tau_max()` samples and only outputs
/// with full filter support are kept, so `N - order` columns are returned.
pub fn project(q_perp: &LaurentMatrix, x: &CMatrix) -> Result<SyndromeStream> {
    let m = x.nrows();
    if q_perp.rows() != m {
        return Err(Error::DimensionMismatch(format!(
            "projection with {} rows applied to {m}-channel data",
            q_perp.rows()
        )));
    }
    let out_len = x.ncols().saturating_sub(q_perp.order());
    let data = if q_perp.order() >= FFT_MIN_ORDER && out_len > 0 {
        filter_fft(q_perp, x, out_len)
    } else {
        filter_direct(q_perp, x, out_len)
    };
    Ok(SyndromeStream { data, valid_from: q_perp.order() })
}

/// Filters at least this long are applied by overlap-save block convolution.
const FFT_MIN_ORDER: usize = 64;

/// Conjugate-transposed taps indexed by input offset from the oldest sample.
fn taps(q_perp: &LaurentMatrix) -> Vec<(usize, CMatrix)> {
    let tau_min = q_perp.tau_min();
    q_perp.lags().map(|(tau, c)| ((tau - tau_min) as usize, c.adjoint())).collect()
}

fn filter_direct(q_perp: &LaurentMatrix, x: &CMatrix, out_len: usize) -> CMatrix {
    let m = x.nrows();
    let d = q_perp.cols();
    let xs = x.as_slice();
    let mut out = vec![Complex64::new(0.0, 0.0); d * out_len];
    for (offset, tap) in &taps(q_perp) {
        let tap = tap.as_slice();
        for i in 0..out_len {
            let xin = &xs[(i + offset) * m..(i + offset + 1) * m];
            let acc = &mut out[i * d..(i + 1) * d];
            for (k, &xk) in xin.iter().enumerate() {
                let col = &tap[k * d..(k + 1) * d];
                for (a, &t) in acc.iter_mut().zip(col) {
                    *a += t * xk;
                }
            }
        }
    }
    CMatrix::from_vec(d, out_len, out)
}

/// Overlap-save: each length-`n` block of input yields `n - order` valid outputs.
fn filter_fft(q_perp: &LaurentMatrix, x: &CMatrix, out_len: usize) -> CMatrix {
    let (m, d, order) = (x.nrows(), q_perp.cols(), q_perp.order());
    let n = (4 * (order + 1)).next_power_of_two();
    let hop = n - order;
    let zero = Complex64::new(0.0, 0.0);
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    // y[i] = sum_o G[o] x[i + o]: correlate, so taps are stored time-reversed
    let mut g = vec![zero; d * m * n];
    for (offset, tap) in taps(q_perp) {
        for k in 0..m {
            for r in 0..d {
                g[(k * d + r) * n + (order - offset)] = tap[(r, k)];
            }
        }
    }
    for chunk in g.chunks_mut(n) {
        fwd.process(chunk);
    }

    let xs = x.as_slice();
    let mut out = CMatrix::zeros(d, out_len);
    let mut xf = vec![zero; m * n];
    let mut yf = vec![zero; d * n];
    let scale = 1.0 / n as f64;
    let mut start = 0;
    while start < out_len {
        let valid = hop.min(out_len - start);
        xf.iter_mut().for_each(|z| *z = zero);
        for t in 0..(valid + order) {
            for k in 0..m {
                xf[k * n + t] = xs[(start + t) * m + k];
            }
        }
        for chunk in xf.chunks_mut(n) {
            fwd.process(chunk);
        }
        yf.iter_mut().for_each(|z| *z = zero);
        for k in 0..m {
            let xk = &xf[k * n..(k + 1) * n];
            for r in 0..d {
                let gk = &g[(k * d + r) * n..(k * d + r + 1) * n];
                for ((y, a), b) in yf[r * n..(r + 1) * n].iter_mut().zip(gk).zip(xk) {
                    *y += a * b;
                }
            }
        }
        for chunk in yf.chunks_mut(n) {
            inv.process(chunk);
        }
        // circular wrap corrupts the first `order` samples of each block
        for i in 0..valid {
            for r in 0..d {
                out[(r, start + i)] = yf[r * n + order + i] * scale;
            }
        }
        start += valid;
    }
    out
}
