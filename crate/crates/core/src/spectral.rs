//! Covariance folding, the symmetric eigensolver, and eigenvalue-gap rank
//! estimation.
//!
//! Folding over features gives the `n1 × n1` matrix
//! `C1 = Σ_j2 L_j2 · L_j2ᵀ` (with `L_j2 = T(:, j2, :)`), whose top
//! eigenvectors localize individuals. Folding over individuals gives the
//! `n2 × n2` matrix `C2 = Σ_j1 H_j1 · H_j1ᵀ` (with `H_j1 = T(j1, :, :)`)
//! for features.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{Matrix, Tensor3};

/// Ratio a consecutive eigenvalue pair must exceed to count as a gap.
pub const DEFAULT_GAP_THRESHOLD: f64 = 3.0;

/// Largest rank the gap search considers by default.
pub const DEFAULT_MAX_RANK: usize = 10;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;

/// Dense symmetric matrix, stored in full row-major form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::arg(format!(
                "symmetric matrix of order {n} needs {} values, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::arg("symmetric matrix entries must be finite"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                    return Err(Error::arg(format!(
                        "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds from the upper triangle; `f(i, j)` is only called for `i <= j`.
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::new(n, data)
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.n).map(|row| dot(row, x)).collect()
    }

    /// `xᵀ S x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(&self.mul_vec(x), x)
    }
}

/// Eigenvalues in non-increasing order with matching unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    values: Vec<f64>,
    /// `n × r`, column `i` pairs with `values[i]`.
    vectors: Matrix,
}

impl EigenPairs {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.vectors.column(i)
    }

    /// Keeps the leading `r` pairs.
    pub fn truncated(&self, r: usize) -> EigenPairs {
        let n = self.vectors.rows();
        let r = r.min(self.values.len());
        let mut vectors = Matrix::zeros(n, r);
        for row in 0..n {
            for c in 0..r {
                vectors.set(row, c, self.vectors.get(row, c));
            }
        }
        EigenPairs { values: self.values[..r].to_vec(), vectors }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `C1 = Σ_j2 T(:, j2, :) · T(:, j2, :)ᵀ`, an `n1 × n1` matrix.
///
/// Entry `(a, b)` is the inner product of horizontal slices `a` and `b`
/// flattened in storage order, which is the ascending-`j2` accumulation.
pub fn fold_covariance_rows(t: &Tensor3) -> SymMatrix {
    let n1 = t.n1();
    let upper: Vec<Vec<f64>> = (0..n1)
        .into_par_iter()
        .map(|a| {
            let block_a = t.horizontal_block(a);
            (a..n1).map(|b| dot(block_a, t.horizontal_block(b))).collect()
        })
        .collect();
    symmetric_from_rows(n1, &upper)
}

/// `C2 = Σ_j1 T(j1, :, :) · T(j1, :, :)ᵀ`, an `n2 × n2` matrix accumulated
/// in ascending `j1`.
pub fn fold_covariance_cols(t: &Tensor3) -> SymMatrix {
    let (n1, n2, m) = t.shape();
    let upper: Vec<Vec<f64>> = (0..n2)
        .into_par_iter()
        .map(|a| {
            let mut row = vec![0.0; n2 - a];
            for j1 in 0..n1 {
                let slab = t.horizontal_block(j1);
                let fa = &slab[a * m..(a + 1) * m];
                for (off, b) in (a..n2).enumerate() {
                    row[off] += dot(fa, &slab[b * m..(b + 1) * m]);
                }
            }
            row
        })
        .collect();
    symmetric_from_rows(n2, &upper)
}

/// Both foldings, computed concurrently.
pub fn fold_covariances(t: &Tensor3) -> (SymMatrix, SymMatrix) {
    rayon::join(|| fold_covariance_rows(t), || fold_covariance_cols(t))
}

fn symmetric_from_rows(n: usize, upper: &[Vec<f64>]) -> SymMatrix {
    let mut data = vec![0.0; n * n];
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + off;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    SymMatrix { n, data }
}

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops to
/// `1e-12 · ‖S‖_F`; more than 100 sweeps is reported as a numerical error.
/// Each eigenvector's first component above `1e-10` in magnitude is made
/// positive so output is reproducible.
pub fn eigen_sym(s: &SymMatrix) -> Result<EigenPairs> {
    let n = s.order();
    let mut a = s.as_slice().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let tol = JACOBI_REL_TOL * s.frobenius_norm();

    let mut converged = false;
    let mut off = off_diagonal_norm(&a, n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
        off = off_diagonal_norm(&a, n);
    }
    if !converged && off > tol {
        return Err(Error::Numerical { sweeps: JACOBI_MAX_SWEEPS, residual: off });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal eigenvalues keep their diagonal position
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));

    let mut vectors = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        values.push(a[src * n + src]);
        let flip = (0..n)
            .map(|r| v[r * n + src])
            .find(|x| x.abs() > 1e-10)
            .is_some_and(|x| x < 0.0);
        let sign = if flip { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors.set(r, col, sign * v[r * n + src]);
        }
    }
    Ok(EigenPairs { values, vectors })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += 2.0 * a[i * n + j] * a[i * n + j];
        }
    }
    sum.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        a[k * n + p] = new_p;
        a[p * n + k] = new_p;
        a[k * n + q] = new_q;
        a[q * n + k] = new_q;
    }
    a[p * n + p] = app - t * apq;
    a[q * n + q] = aqq + t * apq;
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}

/// Leading `r` eigenpairs, `1 <= r <= n`.
pub fn top_eigenpairs(s: &SymMatrix, r: usize) -> Result<EigenPairs> {
    if r == 0 || r > s.order() {
        return Err(Error::arg(format!(
            "requested {r} eigenpairs from a matrix of order {}",
            s.order()
        )));
    }
    Ok(eigen_sym(s)?.truncated(r))
}

/// Position of the largest consecutive-eigenvalue ratio above `theta`, if any.
///
/// Considers ranks `i` in `1..=min(max_rank, limit)` with ratio
/// `values[i-1] / max(values[i], 1e-12 · values[0])`.
fn scan_gaps(values: &[f64], limit: usize, theta: f64) -> Option<(usize, f64)> {
    let lead = *values.first()?;
    if lead <= 0.0 {
        return None;
    }
    let floor = 1e-12 * lead;
    let mut best: Option<(usize, f64)> = None;
    for i in 1..=limit.min(values.len().saturating_sub(1)) {
        let ratio = values[i - 1] / values[i].max(floor);
        if ratio > theta && best.is_none_or(|(_, b)| ratio > b) {
            best = Some((i, ratio));
        }
    }
    best
}

/// Number of leading eigenvalues separated from the rest by the largest
/// ratio gap exceeding `theta`; `1` when no ratio exceeds it.
///
/// `values` must be non-increasing. Ties between equal ratios go to the
/// smaller rank.
pub fn estimate_rank_by_gap(values: &[f64], max_rank: usize, theta: f64) -> usize {
    scan_gaps(values, max_rank, theta).map_or(1, |(r, _)| r)
}

/// Outcome of [`estimate_rank`] on a full spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankEstimate {
    pub rank: usize,
    /// Whether any ratio exceeded the threshold.
    pub gap_found: bool,
    /// Ratio at the chosen gap (`1.0` when none was found).
    pub ratio: f64,
    /// Bulk level subtracted before the ratio test.
    pub bulk: f64,
}

/// Median of the spectrum, taken as the level of the noise bulk.
pub fn bulk_level(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// Gap-based rank estimate on the full spectrum of a folded covariance.
///
/// A folded noise tensor contributes a bulk of eigenvalues around
/// `n2·m·σ²` (or `n1·m·σ²`) that every signal eigenvalue rides on, which
/// compresses raw ratios toward 1. The bulk level (median eigenvalue) is
/// subtracted first and [`estimate_rank_by_gap`] runs on the excess. The
/// candidate ranks stay in the top third of the spectrum so the search never
/// reaches the median itself.
pub fn estimate_rank(values: &[f64], max_rank: usize, theta: f64) -> RankEstimate {
    let bulk = bulk_level(values).max(0.0);
    let excess: Vec<f64> = values.iter().map(|v| v - bulk).collect();
    let limit = max_rank.min((values.len() / 3).max(1));
    match scan_gaps(&excess, limit, theta) {
        Some((rank, ratio)) => RankEstimate { rank, gap_found: true, ratio, bulk },
        None => RankEstimate { rank: 1, gap_found: false, ratio: 1.0, bulk },
    }
}
