//! Dense real matrices and the decompositions the collaboration build needs:
//! truncated SVD, Moore-Penrose pseudoinverse, least-squares solve.
//!
//! Convention throughout the crate: a dataset matrix stores one sample per
//! column, so an `m x n` matrix holds `n` samples with `m` features each.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major `f64` matrix. Immutable after construction; every
/// constructor rejects NaN/infinite entries and empty shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Serde surface for `Matrix`; validated on the way in.
#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for Matrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Matrix> {
        Matrix::from_vec(raw.rows, raw.cols, raw.data)
    }
}

impl From<Matrix> for RawMatrix {
    fn from(m: Matrix) -> RawMatrix {
        RawMatrix {
            rows: m.rows,
            cols: m.cols,
            data: m.data,
        }
    }
}

impl Matrix {
    /// Build from a row-major buffer of length `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "buffer length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: idx / cols,
                col: idx % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("matrix must have at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    /// Build from column vectors (samples).
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::Dimension(
                "matrix must have at least one column".into(),
            ));
        }
        let rows = cols[0].len();
        if cols.iter().any(|c| c.len() != rows) {
            return Err(Error::Dimension("ragged columns".into()));
        }
        let mut data = vec![0.0; rows * cols.len()];
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                data[i * cols.len() + j] = *v;
            }
        }
        Self::from_vec(rows, cols.len(), data)
    }

    /// Build by evaluating `f(row, col)` on every entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.saturating_mul(cols));
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_vec(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = value;
    }

    /// Row-major entry buffer.
    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    /// Copy of column `j` (sample `j`).
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j * self.rows + i] = self.get(i, j);
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data: out,
        }
    }

    /// `self * rhs`; errors unless `self.cols == rhs.rows`.
    ///
    /// The (i, j) entry is accumulated independently in index order, so a
    /// product restricted to one column of `rhs` is bitwise equal to the
    /// corresponding column of the full product.
    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = vec![0.0; self.rows * rhs.cols];
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self.get(i, k) * rhs.get(k, j);
                }
                out[i * rhs.cols + j] = acc;
            }
        }
        Ok(Matrix {
            rows: self.rows,
            cols: rhs.cols,
            data: out,
        })
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Horizontal concatenation: all blocks share a row count, columns are
    /// appended in block order.
    pub fn hstack(blocks: &[Matrix]) -> Result<Matrix> {
        if blocks.is_empty() {
            return Err(Error::Dimension("hstack of zero blocks".into()));
        }
        let rows = blocks[0].rows;
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::Dimension("hstack blocks differ in row count".into()));
        }
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = vec![0.0; rows * cols];
        let mut offset = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out[i * cols + offset + j] = b.get(i, j);
                }
            }
            offset += b.cols;
        }
        Ok(Matrix { rows, cols, data: out })
    }

    /// Mean over columns: the average sample, length `rows`.
    pub fn column_mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self.get(i, j);
            }
            mean[i] = acc / self.cols as f64;
        }
        mean
    }

    /// Subtract a per-row offset from every column.
    pub fn center_columns(&self, offset: &[f64]) -> Result<Matrix> {
        if offset.len() != self.rows {
            return Err(Error::Dimension(format!(
                "offset length {} does not match {} rows",
                offset.len(),
                self.rows
            )));
        }
        Matrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - offset[i])
    }

    /// Bitwise equality of every entry (exact, including -0.0 vs 0.0).
    pub fn bits_eq(&self, other: &Matrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Truncated singular value decomposition `a ~ u * diag(sigma) * vt`.
///
/// `u` has orthonormal columns, `sigma` is nonincreasing and nonnegative,
/// `vt` has orthonormal rows. The decomposition is deterministic: the
/// largest-magnitude entry of each left singular vector is nonnegative
/// (ties broken by lowest row index).
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub vt: Matrix,
}

/// Rank cutoff: singular values at or below `max(rows, cols) * eps * sigma_max`
/// are treated as zero.
pub(crate) fn rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Full one-sided Jacobi SVD working on column vectors.
/// Returns (u columns, sigma, v columns), sorted by sigma nonincreasing.
/// Columns of `u`/`v` whose singular value falls below the rank tolerance
/// carry no information from `a`; they are completed to an orthonormal
/// basis deterministically so `u^T u = I` holds for every truncation.
fn jacobi_svd(a: &Matrix) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
    let transposed = a.rows < a.cols;
    let work = if transposed { a.transpose() } else { a.clone() };
    let m = work.rows;
    let n = work.cols;

    let mut b: Vec<Vec<f64>> = (0..n).map(|j| work.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    const TOL: f64 = 1e-15;
    const MAX_SWEEPS: usize = 100;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&b[p], &b[p]);
                let beta = dot(&b[q], &b[q]);
                let gamma = dot(&b[p], &b[q]);
                if gamma == 0.0 || gamma.abs() <= TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut b, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<f64> = b.iter().map(|col| dot(col, col).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap().then(i.cmp(&j)));
    b = order.iter().map(|&i| b[i].clone()).collect();
    v = order.iter().map(|&i| v[i].clone()).collect();
    sigma = order.iter().map(|&i| sigma[i]).collect();

    let cutoff = rank_tolerance(m, n, sigma[0]);
    let mut u: Vec<Vec<f64>> = Vec::with_capacity(n);
    for (j, col) in b.iter().enumerate() {
        if sigma[j] > cutoff {
            u.push(col.iter().map(|x| x / sigma[j]).collect());
        } else {
            u.push(vec![0.0; m]); // placeholder, completed below
        }
    }
    for j in 0..n {
        if sigma[j] <= cutoff {
            u[j] = complete_direction(&u[..j], m);
        }
    }

    if transposed {
        (v, sigma, u)
    } else {
        (u, sigma, v)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn rotate_pair(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    for i in 0..cols[p].len() {
        let vp = cols[p][i];
        let vq = cols[q][i];
        cols[p][i] = c * vp - s * vq;
        cols[q][i] = s * vp + c * vq;
    }
}

/// Deterministic orthonormal completion: the standard basis vector with the
/// largest residual after projecting out `existing` (lowest index on ties),
/// normalized.
fn complete_direction(existing: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for t in 0..dim {
        let mut cand = vec![0.0; dim];
        cand[t] = 1.0;
        for col in existing {
            let proj = dot(&cand, col);
            for i in 0..dim {
                cand[i] -= proj * col[i];
            }
        }
        let norm = dot(&cand, &cand).sqrt();
        if best.as_ref().map_or(true, |(b, _)| norm > *b) {
            best = Some((norm, cand));
        }
    }
    let (norm, cand) = best.unwrap();
    cand.iter().map(|x| x / norm).collect()
}

/// The `k` dominant singular triplets of `a`.
///
/// Requires `1 <= k <= min(rows, cols)`. Calling twice on the same matrix
/// yields bitwise-identical output.
pub fn svd_truncated(a: &Matrix, k: usize) -> Result<SvdResult> {
    let limit = a.rows().min(a.cols());
    if k == 0 || k > limit {
        return Err(Error::Dimension(format!(
            "truncation rank {k} out of range 1..={limit} for {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let (mut u_cols, sigma, mut v_cols) = jacobi_svd(a);
    u_cols.truncate(k);
    v_cols.truncate(k);
    let sigma: Vec<f64> = sigma[..k].to_vec();

    // Sign convention: largest-magnitude entry of each left singular vector
    // made nonnegative, ties to the lowest index; v flipped to match.
    for (uc, vc) in u_cols.iter_mut().zip(v_cols.iter_mut()) {
        let mut lead = 0;
        for (i, x) in uc.iter().enumerate() {
            if x.abs() > uc[lead].abs() {
                lead = i;
            }
        }
        if uc[lead] < 0.0 {
            for x in uc.iter_mut() {
                *x = -*x;
            }
            for x in vc.iter_mut() {
                *x = -*x;
            }
        }
    }

    let u = Matrix::from_columns(&u_cols)?;
    let vt = Matrix::from_columns(&v_cols)?.transpose();
    Ok(SvdResult { u, sigma, vt })
}

/// Moore-Penrose pseudoinverse. Singular values at or below the rank
/// tolerance are truncated; use [`pseudoinverse_with_rank`] to observe the
/// effective rank that survived.
pub fn pseudoinverse(a: &Matrix) -> Matrix {
    pseudoinverse_with_rank(a).0
}

/// Pseudoinverse plus the number of singular values kept.
pub fn pseudoinverse_with_rank(a: &Matrix) -> (Matrix, usize) {
    let (u_cols, sigma, v_cols) = jacobi_svd(a);
    let cutoff = rank_tolerance(a.rows(), a.cols(), sigma[0]);
    let mut out = vec![0.0; a.cols() * a.rows()];
    let mut rank = 0;
    for (j, s) in sigma.iter().enumerate() {
        if *s <= cutoff {
            continue;
        }
        rank += 1;
        let inv = 1.0 / s;
        for r in 0..a.cols() {
            let vr = v_cols[j][r] * inv;
            for c in 0..a.rows() {
                out[r * a.rows() + c] += vr * u_cols[j][c];
            }
        }
    }
    (
        Matrix {
            rows: a.cols(),
            cols: a.rows(),
            data: out,
        },
        rank,
    )
}

/// Effective numerical rank under the shared tolerance rule.
pub fn effective_rank(sigma: &[f64], rows: usize, cols: usize) -> usize {
    if sigma.is_empty() {
        return 0;
    }
    let cutoff = rank_tolerance(rows, cols, sigma[0]);
    sigma.iter().filter(|s| **s > cutoff).count()
}

/// Minimal-Frobenius-norm `W` solving `min || b - W a ||_F`, with samples as
/// columns in both `a` and `b`.
pub fn lstsq(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.cols() {
        return Err(Error::Dimension(format!(
            "lstsq needs equal sample counts, got {} vs {}",
            a.cols(),
            b.cols()
        )));
    }
    b.matmul(&pseudoinverse(a))
}
