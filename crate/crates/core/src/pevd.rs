//! Polynomial eigenvalue decomposition of para-Hermitian matrices.
//!
//! Sequential matrix diagonalisation: each iteration finds the column whose
//! off-diagonal energy at a single lag is largest (by default relative to the column's
//! lag-zero diagonal entry, see [`ColumnSearch`]), delays that column (and advances
//! the matching row) so the energy lands at lag zero, then diagonalises the lag-zero
//! coefficient with an ordered Hermitian EVD applied across all lags. Every step is
//! paraunitary, so the accumulated eigenvector matrix `Q(z)` is paraunitary by
//! construction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c64, frobenius_sq, hermitian_eig_desc, CMatrix};
use crate::polymat::{trim_bounds, LaurentMatrix};

/// Relative energy below which boundary lags of `Q(z)` may be dropped. Kept far below
/// the paraunitarity tolerance so that trimming never breaks losslessness.
const Q_TRIM_EPS: f64 = 1e-20;

/// Boundary trimming of the running eigenvalue matrix during iteration.
const S_TRIM_EPS: f64 = 1e-16;

/// Tuning knobs for [`pevd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PevdOptions {
    pub max_iter: usize,
    /// Target off-diagonal energy ratio.
    pub residual_tol: f64,
    /// Relative energy trimmed from the boundary lags of the eigenvalue matrix.
    pub trunc_eps: f64,
    pub search: ColumnSearch,
}

/// How each iteration ranks the candidate (column, lag) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnSearch {
    /// Largest off-diagonal column energy.
    Energy,
    /// Off-diagonal column energy divided by the column's lag-zero diagonal entry, so
    /// weak eigenvalues are separated from the noise floor as early as strong ones.
    #[default]
    Normalised,
}

impl Default for PevdOptions {
    fn default() -> Self {
        Self { max_iter: 500, residual_tol: 1e-3, trunc_eps: 1e-6, search: ColumnSearch::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PevdStatus {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct AnalyticEvd {
    /// Paraunitary eigenvector matrix.
    pub q: LaurentMatrix,
    /// Approximately diagonal `Q^P R Q`, lag-zero diagonal sorted non-increasing.
    pub lambda: LaurentMatrix,
    /// Off-diagonal energy ratio of `Q^P R Q`.
    pub residual: f64,
    pub iterations: usize,
    pub status: PevdStatus,
    /// Off-diagonal energy ratio after each iteration (entry 0 is the input).
    pub trace: Vec<f64>,
    /// Lag-zero diagonal energy after each iteration; never decreases beyond trimming loss.
    pub diagonal_trace: Vec<f64>,
}

impl AnalyticEvd {
    pub fn dim(&self) -> usize {
        self.q.rows()
    }
}

/// Signal / noise-only split of an eigenvector matrix.
#[derive(Debug, Clone)]
pub struct SubspacePartition {
    /// `M x L` eigenvectors of the `L` dominant eigenvalues.
    pub q_par: LaurentMatrix,
    /// `M x (M-L)` eigenvectors spanning the noise-only subspace.
    pub q_perp: LaurentMatrix,
    pub signal_dim: usize,
}

fn offdiag_energy(c: &CMatrix) -> f64 {
    let mut e = 0.0;
    for k in 0..c.ncols() {
        for i in 0..c.nrows() {
            if i != k {
                e += c[(i, k)].norm_sqr();
            }
        }
    }
    e
}

fn residual_of(s: &LaurentMatrix) -> f64 {
    let total = s.energy();
    if total == 0.0 {
        return 0.0;
    }
    s.coeffs().iter().map(offdiag_energy).sum::<f64>() / total
}

/// Off-diagonal Frobenius energy of `Q^P R Q` over all lags divided by its total energy.
pub fn diagonalisation_residual(r: &LaurentMatrix, q: &LaurentMatrix) -> Result<f64> {
    let s = q.paraconjugate().multiply(&r.multiply(q)?)?;
    Ok(residual_of(&s))
}

/// Lag coefficients stacked vertically: rows `i m..(i + 1) m` hold lag `tau_min + i`.
/// Right multiplication of every lag is then a single product.
struct Stack {
    tau_min: i64,
    m: usize,
    data: CMatrix,
}

impl Stack {
    fn new(a: &LaurentMatrix) -> Self {
        let (m, n) = a.shape();
        let mut data = CMatrix::zeros(m * a.num_lags(), n);
        for (i, c) in a.coeffs().iter().enumerate() {
            data.view_mut((i * m, 0), (m, n)).copy_from(c);
        }
        Self { tau_min: a.tau_min(), m, data }
    }

    fn num_lags(&self) -> usize {
        self.data.nrows() / self.m
    }

    fn to_laurent(&self) -> LaurentMatrix {
        let n = self.data.ncols();
        let coeffs = (0..self.num_lags()).map(|i| self.data.view((i * self.m, 0), (self.m, n)).into_owned()).collect();
        LaurentMatrix::new(self.tau_min, coeffs).expect("non-empty")
    }

    fn lag_zero(&self) -> CMatrix {
        let n = self.data.ncols();
        match usize::try_from(-self.tau_min).ok().filter(|&i| i < self.num_lags()) {
            Some(i) => self.data.view((i * self.m, 0), (self.m, n)).into_owned(),
            None => CMatrix::zeros(self.m, n),
        }
    }

    /// Energy off the main diagonal of each (square) lag coefficient.
    fn offdiag_energy(&self) -> f64 {
        let diag: f64 = (0..self.num_lags())
            .flat_map(|i| (0..self.m).map(move |k| (i * self.m + k, k)))
            .map(|idx| self.data[idx].norm_sqr())
            .sum();
        self.data.norm_squared() - diag
    }

    fn lag_zero_diagonal_energy(&self) -> f64 {
        let s0 = self.lag_zero();
        (0..self.m).map(|k| s0[(k, k)].norm_sqr()).sum()
    }

    fn residual(&self) -> f64 {
        let total = self.data.norm_squared();
        if total == 0.0 {
            0.0
        } else {
            (self.offdiag_energy() / total).max(0.0)
        }
    }

    /// Column `k` moves from lag `t` to `t + d`; with `rows` set, row `k` moves from `t`
    /// to `t - d` as well and the diagonal entry stays put.
    fn shift(&mut self, k: usize, d: i64, rows: bool) {
        let reach = d.unsigned_abs() as usize;
        let (m, n) = (self.m, self.data.ncols());
        let lags = self.num_lags();
        let mut out = CMatrix::zeros(m * (lags + 2 * reach), n);
        out.view_mut((reach * m, 0), (lags * m, n)).copy_from(&self.data);
        let dest = |i: usize, by: i64| ((i + reach) as i64 + by) as usize * m;
        let in_row = |r: usize| rows && r == k;
        for i in 0..lags {
            for r in (0..m).filter(|&r| !in_row(r)) {
                out[((i + reach) * m + r, k)] = Complex64::new(0.0, 0.0);
            }
            if rows {
                for c in (0..n).filter(|&c| c != k) {
                    out[((i + reach) * m + k, c)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        for i in 0..lags {
            for r in (0..m).filter(|&r| !in_row(r)) {
                out[(dest(i, d) + r, k)] = self.data[(i * m + r, k)];
            }
            if rows {
                for c in (0..n).filter(|&c| c != k) {
                    out[(dest(i, -d) + k, c)] = self.data[(i * m + k, c)];
                }
            }
        }
        self.data = out;
        self.tau_min -= reach as i64;
    }

    /// `left * A[tau] * right` at every lag; `left` defaults to the identity.
    fn rotate(&mut self, left: Option<&CMatrix>, right: &CMatrix) {
        self.data = &self.data * right;
        if let Some(l) = left {
            let (m, n) = (self.m, self.data.ncols());
            let mut tmp = CMatrix::zeros(m, n);
            for i in 0..self.num_lags() {
                let mut block = self.data.view_mut((i * m, 0), (m, n));
                tmp.gemm(c64(1.0, 0.0), l, &block, c64(0.0, 0.0));
                block.copy_from(&tmp);
            }
        }
    }

    /// Greedy boundary trimming, as [`LaurentMatrix::truncate`].
    fn truncate(&mut self, eps: f64) {
        let (m, n) = (self.m, self.data.ncols());
        let energies: Vec<f64> =
            (0..self.num_lags()).map(|i| self.data.view((i * m, 0), (m, n)).norm_squared()).collect();
        let (lo, hi) = trim_bounds(&energies, eps);
        if lo > 0 || hi + 1 < energies.len() {
            self.data = self.data.rows(lo * m, (hi - lo + 1) * m).into_owned();
            self.tau_min += lo as i64;
        }
    }
}

/// `(A + A^P) / 2` over the union of lags.
fn parahermitian_part(a: &LaurentMatrix) -> LaurentMatrix {
    a.add(&a.paraconjugate()).expect("square").scale(c64(0.5, 0.0))
}

/// Reorders columns of `q` (and rows/columns of `s`) so the lag-zero diagonal of `s` is
/// non-increasing.
fn sort_by_lag0(q: &LaurentMatrix, s: &LaurentMatrix) -> (LaurentMatrix, LaurentMatrix) {
    let m = q.cols();
    let s0 = s.coeff_or_zero(0);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| s0[(j, j)].re.total_cmp(&s0[(i, i)].re));
    let mut perm = CMatrix::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        perm[(src, dst)] = c64(1.0, 0.0);
    }
    let pt = perm.transpose();
    let permute = |a: &LaurentMatrix, left: bool| {
        let coeffs = a.coeffs().iter().map(|c| if left { &pt * c * &perm } else { c * &perm }).collect();
        LaurentMatrix::new(a.tau_min(), coeffs).expect("non-empty")
    };
    (permute(q, false), permute(s, true))
}

/// Column and lag holding the most off-diagonal energy under the chosen weighting.
fn select_column(s: &Stack, search: ColumnSearch) -> (usize, i64) {
    let m = s.m;
    let s0 = s.lag_zero();
    let mut best = (0usize, 0i64, -1.0f64);
    for k in 0..m {
        let weight = match search {
            ColumnSearch::Energy => 1.0,
            ColumnSearch::Normalised => 1.0 / s0[(k, k)].re.abs().max(f64::MIN_POSITIVE),
        };
        let col = s.data.column(k);
        for i in 0..s.num_lags() {
            let e: f64 = (0..m).filter(|&r| r != k).map(|r| col[i * m + r].norm_sqr()).sum::<f64>() * weight;
            if e > best.2 {
                best = (k, s.tau_min + i as i64, e);
            }
        }
    }
    (best.0, best.1)
}

/// Iterative polynomial EVD `R(z) ~ Q(z) Lambda(z) Q^P(z)`.
///
/// Non-convergence is not an error: the result carries `PevdStatus::MaxIterations` and
/// the residual reached.
pub fn pevd(r: &LaurentMatrix, opts: &PevdOptions) -> Result<AnalyticEvd> {
    if !r.is_square() {
        return Err(Error::NotSquare { rows: r.rows(), cols: r.cols() });
    }
    let scale = r.coeffs().iter().map(frobenius_sq).fold(0.0, f64::max).sqrt().max(1.0);
    let dev = r.parahermitian_deviation()?;
    if dev > 1e-10 * scale {
        return Err(Error::NotParaHermitian(dev));
    }
    let m = r.rows();
    let mut q = Stack::new(&LaurentMatrix::identity(m));
    let mut s = Stack::new(r);
    let mut trace = vec![s.residual()];
    let mut diagonal_trace = vec![s.lag_zero_diagonal_energy()];
    let mut iterations = 0;
    let mut status = PevdStatus::MaxIterations;
    // the running estimate ignores what trimming dropped, so convergence is confirmed on
    // the exact product
    let exact = |q: &Stack| -> Result<LaurentMatrix> {
        let q = q.to_laurent();
        q.paraconjugate().multiply(&r.multiply(&q)?)
    };

    let s = loop {
        if *trace.last().expect("non-empty") <= opts.residual_tol {
            let full = exact(&q)?;
            if residual_of(&full) <= opts.residual_tol {
                status = PevdStatus::Converged;
                break full;
            }
            s = Stack::new(&full);
        }
        if iterations >= opts.max_iter {
            break exact(&q)?;
        }

        let (k, lag) = select_column(&s, opts.search);
        if lag != 0 {
            s.shift(k, -lag, true);
            q.shift(k, -lag, false);
        }
        let (_, v) = hermitian_eig_desc(&s.lag_zero());
        s.rotate(Some(&v.adjoint()), &v);
        q.rotate(None, &v);
        s.truncate(S_TRIM_EPS);
        q.truncate(Q_TRIM_EPS);
        iterations += 1;
        trace.push(s.residual());
        diagonal_trace.push(s.lag_zero_diagonal_energy());
    };
    let q = q.to_laurent();

    let s = parahermitian_part(&s);
    let (q, s) = sort_by_lag0(&q, &s);
    let residual = residual_of(&s);
    if let Some(last) = trace.last_mut() {
        *last = residual;
    }
    let lambda = s.truncate(opts.trunc_eps);
    Ok(AnalyticEvd { q, lambda, residual, iterations, status, trace, diagonal_trace })
}

/// Splits the eigenvectors into the `l` dominant columns and the noise-only remainder.
pub fn partition(evd: &AnalyticEvd, l: usize) -> Result<SubspacePartition> {
    let m = evd.dim();
    if l == 0 || l >= m {
        return Err(Error::InvalidArgument(format!("signal dimension {l} must lie in 1..{m}")));
    }
    Ok(SubspacePartition {
        q_par: evd.q.select_columns(0..l)?,
        q_perp: evd.q.select_columns(l..m)?,
        signal_dim: l,
    })
}
