//! Matrix-valued Laurent polynomials.
//!
//! A [`LaurentMatrix`] stores `A(z) = sum_tau A[tau] z^{-tau}` as a dense sequence of
//! equally sized complex coefficient matrices over a contiguous lag range
//! `tau_min ..= tau_max`. It carries mixing systems, cross-spectral densities,
//! eigenvector and eigenvalue matrices alike.
//!
//! Arithmetic never renormalises the lag range except for stripping exactly-zero
//! boundary lags, so results are reproducible bit for bit.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{c64, frobenius_sq, CMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentMatrix {
    rows: usize,
    cols: usize,
    tau_min: i64,
    coeffs: Vec<CMatrix>,
}

/// Lags above this count on both operands switch [`LaurentMatrix::multiply`] to the DFT.
const FFT_MIN_LAGS: usize = 48;

/// Inclusive index range kept when boundary lags holding at most `epsilon` of the total
/// energy are dropped, always removing the cheaper end first.
pub(crate) fn trim_bounds(energies: &[f64], epsilon: f64) -> (usize, usize) {
    let budget = epsilon * energies.iter().sum::<f64>();
    let (mut lo, mut hi) = (0usize, energies.len() - 1);
    let mut removed = 0.0;
    while lo < hi {
        let take_front = energies[lo] <= energies[hi];
        let e = if take_front { energies[lo] } else { energies[hi] };
        if removed + e > budget {
            break;
        }
        removed += e;
        if take_front {
            lo += 1;
        } else {
            hi -= 1;
        }
    }
    (lo, hi)
}

impl LaurentMatrix {
    /// Builds a polynomial matrix whose first coefficient sits at lag `tau_min`.
    pub fn new(tau_min: i64, coeffs: Vec<CMatrix>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty coefficient sequence".into()))?;
        let (rows, cols) = first.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("zero-sized coefficient matrix".into()));
        }
        if let Some(bad) = coeffs.iter().find(|c| c.shape() != (rows, cols)) {
            return Err(Error::DimensionMismatch(format!(
                "coefficient of shape {:?} in a {}x{} polynomial matrix",
                bad.shape(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, tau_min, coeffs })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::constant(CMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(CMatrix::identity(n, n))
    }

    /// `c` placed at lag 0.
    pub fn constant(c: CMatrix) -> Self {
        Self::monomial(c, 0)
    }

    /// `c z^{-lag}`.
    pub fn monomial(c: CMatrix, lag: i64) -> Self {
        let (rows, cols) = c.shape();
        assert!(rows > 0 && cols > 0, "zero-sized coefficient matrix");
        Self { rows, cols, tau_min: lag, coeffs: vec![c] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn tau_min(&self) -> i64 {
        self.tau_min
    }

    pub fn tau_max(&self) -> i64 {
        self.tau_min + self.coeffs.len() as i64 - 1
    }

    pub fn num_lags(&self) -> usize {
        self.coeffs.len()
    }

    /// Polynomial order, i.e. `tau_max - tau_min`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<CMatrix> {
        self.coeffs
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Coefficient at lag `tau`, `None` outside the stored range.
    pub fn coeff(&self, tau: i64) -> Option<&CMatrix> {
        let idx = tau - self.tau_min;
        if idx < 0 {
            return None;
        }
        self.coeffs.get(idx as usize)
    }

    /// Coefficient at lag `tau`, zero outside the stored range.
    pub fn coeff_or_zero(&self, tau: i64) -> CMatrix {
        self.coeff(tau)
            .cloned()
            .unwrap_or_else(|| CMatrix::zeros(self.rows, self.cols))
    }

    /// Iterator over `(lag, coefficient)` pairs.
    pub fn lags(&self) -> impl Iterator<Item = (i64, &CMatrix)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.tau_min + i as i64, c))
    }

    /// Total Frobenius energy over all lags.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(frobenius_sq).sum()
    }

    /// Hermitian transpose combined with time reversal: `B[tau] = A[-tau]^H`.
    pub fn paraconjugate(&self) -> Self {
        let coeffs = self.coeffs.iter().rev().map(|c| c.adjoint()).collect();
        Self {
            rows: self.cols,
            cols: self.rows,
            tau_min: -self.tau_max(),
            coeffs,
        }
    }

    /// Polynomial matrix product, i.e. convolution of the coefficient sequences.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let len = self.coeffs.len() + other.coeffs.len() - 1;
        let out = if self.coeffs.len().min(other.coeffs.len()) > FFT_MIN_LAGS {
            self.fft_convolve(other, len)
        } else {
            let mut out = vec![CMatrix::zeros(self.rows, other.cols); len];
            let one = c64(1.0, 0.0);
            for (i, a) in self.coeffs.iter().enumerate() {
                for (j, b) in other.coeffs.iter().enumerate() {
                    out[i + j].gemm(one, a, b, one);
                }
            }
            out
        };
        let mut prod = Self {
            rows: self.rows,
            cols: other.cols,
            tau_min: self.tau_min + other.tau_min,
            coeffs: out,
        };
        prod.strip_zero_lags();
        Ok(prod)
    }

    /// Coefficient convolution through the DFT, for long operands.
    fn fft_convolve(&self, other: &Self, len: usize) -> Vec<CMatrix> {
        let n = len.next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let zero = Complex64::new(0.0, 0.0);
        // one length-n spectrum per matrix entry, stored entry-major
        let spectra = |a: &Self| -> Vec<Complex64> {
            let (r, c) = (a.rows, a.cols);
            let mut buf = vec![zero; r * c * n];
            for (t, coeff) in a.coeffs.iter().enumerate() {
                for (e, z) in coeff.iter().enumerate() {
                    buf[e * n + t] = *z;
                }
            }
            for chunk in buf.chunks_mut(n) {
                fwd.process(chunk);
            }
            buf
        };
        let fa = spectra(self);
        let fb = spectra(other);
        let (r, inner, c) = (self.rows, self.cols, other.cols);
        let mut fc = vec![zero; r * c * n];
        // column-major entry index: (i, k) -> k * rows + i
        for k in 0..c {
            for j in 0..inner {
                let b = &fb[(k * inner + j) * n..(k * inner + j + 1) * n];
                for i in 0..r {
                    let a = &fa[(j * r + i) * n..(j * r + i + 1) * n];
                    let out = &mut fc[(k * r + i) * n..(k * r + i + 1) * n];
                    for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                        *o += x * y;
                    }
                }
            }
        }
        let scale = 1.0 / n as f64;
        for chunk in fc.chunks_mut(n) {
            inv.process(chunk);
        }
        (0..len)
            .map(|t| CMatrix::from_fn(r, c, |i, k| fc[(k * r + i) * n + t] * scale))
            .collect()
    }

    /// Entrywise sum over the union of both lag ranges.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, c64(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, c64(-1.0, 0.0))
    }

    fn combine(&self, other: &Self, sign: Complex64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch(format!(
                "cannot add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let lo = self.tau_min.min(other.tau_min);
        let hi = self.tau_max().max(other.tau_max());
        let coeffs = (lo..=hi)
            .map(|tau| match (self.coeff(tau), other.coeff(tau)) {
                (Some(a), Some(b)) => a + b * sign,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b * sign,
                (None, None) => CMatrix::zeros(self.rows, self.cols),
            })
            .collect();
        let mut sum = Self { rows: self.rows, cols: self.cols, tau_min: lo, coeffs };
        sum.strip_zero_lags();
        Ok(sum)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            tau_min: self.tau_min,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Columns `range` of every coefficient.
    pub fn select_columns(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.cols {
            return Err(Error::InvalidArgument(format!(
                "column range {:?} out of bounds for {} columns",
                range, self.cols
            )));
        }
        let width = range.end - range.start;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.columns(range.start, width).into_owned())
            .collect();
        let mut out = Self { rows: self.rows, cols: width, tau_min: self.tau_min, coeffs };
        out.strip_zero_lags();
        Ok(out)
    }

    /// Column-wise concatenation `[self, other]`.
    pub fn hconcat(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot concatenate {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        let lo = self.tau_min.min(other.tau_min);
        let hi = self.tau_max().max(other.tau_max());
        let cols = self.cols + other.cols;
        let coeffs = (lo..=hi)
            .map(|tau| {
                let mut c = CMatrix::zeros(self.rows, cols);
                if let Some(a) = self.coeff(tau) {
                    c.columns_mut(0, self.cols).copy_from(a);
                }
                if let Some(b) = other.coeff(tau) {
                    c.columns_mut(self.cols, other.cols).copy_from(b);
                }
                c
            })
            .collect();
        Ok(Self { rows: self.rows, cols, tau_min: lo, coeffs })
    }

    /// Largest per-lag deviation `||R[tau] - R[-tau]^H||_F`, missing lags read as zero.
    pub fn parahermitian_deviation(&self) -> Result<f64> {
        self.require_square()?;
        let reach = self.tau_min.abs().max(self.tau_max().abs());
        let mut worst = 0.0f64;
        for tau in -reach..=reach {
            let a = self.coeff_or_zero(tau);
            let b = self.coeff_or_zero(-tau).adjoint();
            worst = worst.max(frobenius_sq(&(a - b)).sqrt());
        }
        Ok(worst)
    }

    pub fn is_parahermitian(&self, tol: f64) -> Result<bool> {
        Ok(self.parahermitian_deviation()? <= tol)
    }

    /// Largest per-lag Frobenius deviation of `Q^P(z) Q(z)` from the identity.
    pub fn paraunitary_deviation(&self) -> Result<f64> {
        self.require_square()?;
        let gram = self.paraconjugate().multiply(self)?;
        let ident = CMatrix::identity(self.rows, self.cols);
        let mut worst = 0.0f64;
        for (tau, c) in gram.lags() {
            let dev = if tau == 0 { frobenius_sq(&(c - &ident)) } else { frobenius_sq(c) };
            worst = worst.max(dev.sqrt());
        }
        if gram.coeff(0).is_none() {
            worst = worst.max((self.rows as f64).sqrt());
        }
        Ok(worst)
    }

    pub fn is_paraunitary(&self, tol: f64) -> Result<bool> {
        Ok(self.paraunitary_deviation()? <= tol)
    }

    /// Greedy end-trimming: repeatedly drops whichever boundary lag carries less energy
    /// while the cumulative removed energy stays within `epsilon` times the total.
    pub fn truncate(&self, epsilon: f64) -> Self {
        let energies: Vec<f64> = self.coeffs.iter().map(frobenius_sq).collect();
        let (lo, hi) = trim_bounds(&energies, epsilon);
        Self {
            rows: self.rows,
            cols: self.cols,
            tau_min: self.tau_min + lo as i64,
            coeffs: self.coeffs[lo..=hi].to_vec(),
        }
    }

    /// Drops exactly-zero boundary lags; an all-zero matrix collapses to lag 0.
    pub fn strip_zero_lags(&mut self) {
        let nonzero = |c: &CMatrix| c.iter().any(|z| *z != Complex64::new(0.0, 0.0));
        match self.coeffs.iter().position(nonzero) {
            None => {
                self.tau_min = 0;
                self.coeffs = vec![CMatrix::zeros(self.rows, self.cols)];
            }
            Some(first) => {
                let last = self.coeffs.iter().rposition(nonzero).unwrap_or(first);
                self.coeffs.truncate(last + 1);
                self.coeffs.drain(..first);
                self.tau_min += first as i64;
            }
        }
    }

    /// `sum_tau A[tau] e^{-j omega tau}`.
    pub fn evaluate_at(&self, omega: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for (tau, c) in self.lags() {
            let phase = Complex64::from_polar(1.0, -omega * tau as f64);
            out += c * phase;
        }
        out
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    /// Text dump: header `rows cols tau_min num_lags`, then one line per coefficient row
    /// holding `re im` pairs in row-major order, lag by lag.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {} {} {}", self.rows, self.cols, self.tau_min, self.coeffs.len())?;
        let mut line = String::new();
        for c in &self.coeffs {
            for r in 0..self.rows {
                line.clear();
                for k in 0..self.cols {
                    let z = c[(r, k)];
                    if k > 0 {
                        line.push(' ');
                    }
                    let _ = write!(line, "{:e} {:e}", z.re, z.im);
                }
                writeln!(w, "{line}")?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text<R: BufRead>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace();
        let mut header = |name: &str| -> Result<&str> {
            tokens.next().ok_or_else(|| Error::Parse(format!("missing header field {name}")))
        };
        let parse_usize = |s: &str, name: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse(format!("{name}: {e}")))
        };
        let rows = parse_usize(header("rows")?, "rows")?;
        let cols = parse_usize(header("cols")?, "cols")?;
        let tau_min = header("tau_min")?
            .parse::<i64>()
            .map_err(|e| Error::Parse(format!("tau_min: {e}")))?;
        let num_lags = parse_usize(header("num_lags")?, "num_lags")?;
        let mut coeffs = Vec::with_capacity(num_lags);
        for lag in 0..num_lags {
            let mut c = CMatrix::zeros(rows, cols);
            for r in 0..rows {
                for k in 0..cols {
                    let mut next = || -> Result<f64> {
                        let tok = tokens.next().ok_or_else(|| {
                            Error::Parse(format!("truncated data in lag {lag}"))
                        })?;
                        tok.parse::<f64>().map_err(|e| Error::Parse(format!("{tok:?}: {e}")))
                    };
                    let re = next()?;
                    let im = next()?;
                    c[(r, k)] = c64(re, im);
                }
            }
            coeffs.push(c);
        }
        if tokens.next().is_some() {
            return Err(Error::Parse("trailing data after last lag".into()));
        }
        Self::new(tau_min, coeffs)
    }
}
