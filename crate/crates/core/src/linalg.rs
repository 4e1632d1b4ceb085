//! Dense matrices and the least-squares kernel behind every pursuit.
//!
//! Least squares on a column subset uses Householder QR with column
//! pivoting. When the pivoted diagonal reveals numerical rank deficiency
//! (relative tolerance [`RANK_TOLERANCE`]) the solve falls back to an SVD
//! pseudo-inverse with the same relative singular-value cutoff, which yields
//! the minimum-norm solution.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::support::SupportSet;

/// Relative singular-value tolerance for the pseudo-inverse.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Column-major dense real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

impl DenseMatrix {
    /// Builds an `rows x cols` matrix from column-major data.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("matrix must be non-empty, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Self {
            inner: DMatrix::from_vec(rows, cols, data),
        })
    }

    /// Builds a matrix from row slices, mostly for tests and examples.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("ragged rows"));
        }
        let mut data = Vec::with_capacity(m * n);
        for j in 0..n {
            data.extend(rows.iter().map(|r| r[j]));
        }
        Self::from_column_major(m, n, data)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let m = self.rows();
        &self.inner.as_slice()[j * m..(j + 1) * m]
    }

    pub fn as_column_major(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.inner
    }

    /// Columns selected by `support`, in ascending index order.
    pub fn select_columns(&self, support: &SupportSet) -> Result<DenseMatrix> {
        self.check_support(support)?;
        if support.is_empty() {
            return Err(Error::invalid("cannot form a matrix with zero columns"));
        }
        let data = self.gather(support);
        Self::from_column_major(self.rows(), support.len(), data)
    }

    /// Matched filter `Aᵀ r`.
    pub fn matched_filter(&self, r: &[f64]) -> Vec<f64> {
        debug_assert_eq!(r.len(), self.rows());
        (0..self.cols()).map(|j| dot(self.column(j), r)).collect()
    }

    /// `A x` for a dense `x` of length `cols`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols());
        let mut out = vec![0.0; self.rows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.column(j), &mut out);
            }
        }
        out
    }

    pub(crate) fn check_support(&self, support: &SupportSet) -> Result<()> {
        if support.min_dimension() > self.cols() {
            return Err(Error::invalid(format!(
                "support index {} outside 1..={}",
                support.min_dimension(),
                self.cols()
            )));
        }
        Ok(())
    }

    fn gather(&self, support: &SupportSet) -> Vec<f64> {
        let mut data = Vec::with_capacity(self.rows() * support.len());
        for j in support.iter() {
            data.extend_from_slice(self.column(j));
        }
        data
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Least-squares fit of `y` onto a set of columns.
#[derive(Debug, Clone)]
pub struct Fit {
    /// Coefficients in the order of the supplied columns.
    pub coefficients: Vec<f64>,
    pub residual: Vec<f64>,
    pub residual_norm: f64,
}

/// Minimum-norm least squares for column-major `rows x k` data.
fn solve_columns(rows: usize, k: usize, columns: &[f64], y: &[f64]) -> Fit {
    let coefficients = if k == 0 {
        Vec::new()
    } else {
        pivoted_qr_solve(rows, k, columns, y).unwrap_or_else(|| svd_solve(rows, k, columns, y))
    };
    let mut residual = y.to_vec();
    for (c, col) in coefficients.iter().zip(columns.chunks_exact(rows.max(1))) {
        axpy(-c, col, &mut residual);
    }
    let residual_norm = norm(&residual);
    Fit {
        coefficients,
        residual,
        residual_norm,
    }
}

/// Householder QR with column pivoting. Returns `None` when the pivoted
/// diagonal shows the columns are numerically rank deficient.
fn pivoted_qr_solve(rows: usize, k: usize, columns: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    if k > rows {
        return None;
    }
    let mut a = columns.to_vec();
    let mut qty = y.to_vec();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut diag = vec![0.0_f64; k];
    let mut v = vec![0.0; rows];

    for i in 0..k {
        // Pivot on the largest remaining trailing column norm. Norms are
        // recomputed rather than downdated; k is small.
        let mut best = i;
        let mut best_norm = -1.0_f64;
        for j in i..k {
            let s = j * rows;
            let nrm: f64 = a[s + i..s + rows].iter().map(|x| x * x).sum();
            if nrm > best_norm {
                best_norm = nrm;
                best = j;
            }
        }
        if best != i {
            for r in 0..rows {
                a.swap(i * rows + r, best * rows + r);
            }
            perm.swap(i, best);
        }

        let s = i * rows;
        let x = &a[s + i..s + rows];
        let xnorm = best_norm.sqrt();
        if i == 0 && xnorm == 0.0 {
            return None;
        }
        if xnorm <= RANK_TOLERANCE * diag[0].abs() {
            return None;
        }
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let len = rows - i;
        v[..len].copy_from_slice(x);
        v[0] -= alpha;
        let vnorm2: f64 = v[..len].iter().map(|t| t * t).sum();
        diag[i] = alpha;
        a[s + i] = alpha;
        for t in a[s + i + 1..s + rows].iter_mut() {
            *t = 0.0;
        }
        if vnorm2 == 0.0 {
            continue;
        }
        let scale = 2.0 / vnorm2;
        for j in i + 1..k {
            let sj = j * rows;
            let d = dot(&v[..len], &a[sj + i..sj + rows]) * scale;
            axpy(-d, &v[..len], &mut a[sj + i..sj + rows]);
        }
        let d = dot(&v[..len], &qty[i..]) * scale;
        axpy(-d, &v[..len], &mut qty[i..]);
    }

    // Back substitution on the k x k upper triangle.
    let mut z = vec![0.0; k];
    for i in (0..k).rev() {
        let mut acc = qty[i];
        for j in i + 1..k {
            acc -= a[j * rows + i] * z[j];
        }
        z[i] = acc / diag[i];
    }
    let mut out = vec![0.0; k];
    for (i, &p) in perm.iter().enumerate() {
        out[p] = z[i];
    }
    Some(out)
}

fn svd_solve(rows: usize, k: usize, columns: &[f64], y: &[f64]) -> Vec<f64> {
    let b = DMatrix::from_column_slice(rows, k, columns);
    let svd = b.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return vec![0.0; k];
    }
    let rhs = DVector::from_column_slice(y);
    svd.solve(&rhs, RANK_TOLERANCE * smax)
        .expect("SVD computed with both factors")
        .iter()
        .copied()
        .collect()
}

/// Least-squares residual `y − B B† y`. An empty column set returns `y`.
pub fn resid(y: &[f64], b: Option<&DenseMatrix>) -> Result<Vec<f64>> {
    match b {
        None => Ok(y.to_vec()),
        Some(b) => {
            if y.len() != b.rows() {
                return Err(Error::invalid(format!(
                    "vector length {} does not match {} matrix rows",
                    y.len(),
                    b.rows()
                )));
            }
            Ok(solve_columns(b.rows(), b.cols(), b.as_column_major(), y).residual)
        }
    }
}

/// Fit of `y` onto the columns of `a` indexed by `support`.
pub fn fit_support(a: &DenseMatrix, y: &[f64], support: &SupportSet) -> Result<Fit> {
    if y.len() != a.rows() {
        return Err(Error::invalid(format!(
            "measurement length {} does not match {} matrix rows",
            y.len(),
            a.rows()
        )));
    }
    a.check_support(support)?;
    let columns = a.gather(support);
    Ok(solve_columns(a.rows(), support.len(), &columns, y))
}

/// Length-N estimate with `A_T† y` on `support` and zeros elsewhere.
pub fn least_squares_on_support(a: &DenseMatrix, y: &[f64], support: &SupportSet) -> Result<Vec<f64>> {
    if support.len() > a.rows() {
        return Err(Error::invalid(format!(
            "support of size {} exceeds {} measurements",
            support.len(),
            a.rows()
        )));
    }
    let fit = fit_support(a, y, support)?;
    Ok(scatter(a.cols(), support, &fit.coefficients))
}

/// Expands support-ordered coefficients to a length-`n` vector.
pub fn scatter(n: usize, support: &SupportSet, coefficients: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for (i, &c) in support.iter().zip(coefficients) {
        x[i] = c;
    }
    x
}
