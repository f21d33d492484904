//! Dense third-order tensors and the index bookkeeping around them.
//!
//! Storage is row-major with the time index fastest, so the trajectory
//! `T(j1, j2, :)` of every (individual, feature) pair is one contiguous run
//! of `m` values and a horizontal slice `T(j1, :, :)` is one contiguous
//! `n2 × m` block.

use crate::error::{Error, Result};

/// Dense real tensor of shape `n1 × n2 × m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n1: usize,
    n2: usize,
    m: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn new(n1: usize, n2: usize, m: usize, data: Vec<f64>) -> Result<Self> {
        if n1 == 0 || n2 == 0 || m == 0 {
            return Err(Error::arg(format!(
                "tensor dimensions must be positive, got {n1}x{n2}x{m}"
            )));
        }
        let expected = n1 * n2 * m;
        if data.len() != expected {
            return Err(Error::arg(format!(
                "tensor {n1}x{n2}x{m} needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::arg(format!("non-finite tensor entry at flat position {pos}")));
        }
        Ok(Self { n1, n2, m, data })
    }

    pub fn zeros(n1: usize, n2: usize, m: usize) -> Result<Self> {
        Self::new(n1, n2, m, vec![0.0; n1 * n2 * m])
    }

    /// Builds a tensor entry by entry; `f` is called in storage order.
    pub fn from_fn(
        n1: usize,
        n2: usize,
        m: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(n1 * n2 * m);
        for j1 in 0..n1 {
            for j2 in 0..n2 {
                for t in 0..m {
                    data.push(f(j1, j2, t));
                }
            }
        }
        Self::new(n1, n2, m, data)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.m)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn offset(&self, j1: usize, j2: usize, t: usize) -> usize {
        (j1 * self.n2 + j2) * self.m + t
    }

    /// Unchecked-by-contract accessor; panics on out-of-range indices.
    #[inline]
    pub fn get(&self, j1: usize, j2: usize, t: usize) -> f64 {
        assert!(j1 < self.n1 && j2 < self.n2 && t < self.m, "tensor index out of range");
        self.data[self.offset(j1, j2, t)]
    }

    fn check_j1(&self, j1: usize) -> Result<()> {
        if j1 >= self.n1 {
            return Err(Error::Index { axis: "n1", index: j1, len: self.n1 });
        }
        Ok(())
    }

    fn check_j2(&self, j2: usize) -> Result<()> {
        if j2 >= self.n2 {
            return Err(Error::Index { axis: "n2", index: j2, len: self.n2 });
        }
        Ok(())
    }

    /// Contiguous view of the trajectory `T(j1, j2, :)`.
    pub fn trajectory(&self, j1: usize, j2: usize) -> Result<&[f64]> {
        self.check_j1(j1)?;
        self.check_j2(j2)?;
        let start = self.offset(j1, j2, 0);
        Ok(&self.data[start..start + self.m])
    }

    /// Mode-3 fiber `T(j1, j2, :)` as an owned vector.
    pub fn fiber(&self, j1: usize, j2: usize) -> Result<Vec<f64>> {
        self.trajectory(j1, j2).map(<[f64]>::to_vec)
    }

    /// Contiguous `n2 × m` block backing the horizontal slice `T(j1, :, :)`.
    pub(crate) fn horizontal_block(&self, j1: usize) -> &[f64] {
        let len = self.n2 * self.m;
        &self.data[j1 * len..(j1 + 1) * len]
    }

    /// `T(j1, :, :)` as an `n2 × m` matrix.
    pub fn horizontal_slice(&self, j1: usize) -> Result<Matrix> {
        self.check_j1(j1)?;
        Ok(Matrix {
            rows: self.n2,
            cols: self.m,
            data: self.horizontal_block(j1).to_vec(),
        })
    }

    /// `T(:, j2, :)` as an `n1 × m` matrix.
    pub fn lateral_slice(&self, j2: usize) -> Result<Matrix> {
        self.check_j2(j2)?;
        let mut data = Vec::with_capacity(self.n1 * self.m);
        for j1 in 0..self.n1 {
            let start = self.offset(j1, j2, 0);
            data.extend_from_slice(&self.data[start..start + self.m]);
        }
        Ok(Matrix { rows: self.n1, cols: self.m, data })
    }

    /// Collects the trajectories of the block `J1 × J2`, one column per
    /// `(j1, j2)` pair in lexicographic order.
    pub fn unfold_block(&self, rows: &IndexSet, cols: &IndexSet) -> Result<TrajectoryMatrix> {
        self.check_bounds(rows, cols)?;
        if rows.is_empty() || cols.is_empty() {
            return Err(Error::arg("unfold_block needs non-empty index sets"));
        }
        let count = rows.len() * cols.len();
        let mut columns = Vec::with_capacity(count * self.m);
        let mut keys = Vec::with_capacity(count);
        for &j1 in rows.iter() {
            for &j2 in cols.iter() {
                let start = self.offset(j1, j2, 0);
                columns.extend_from_slice(&self.data[start..start + self.m]);
                keys.push((j1, j2));
            }
        }
        Ok(TrajectoryMatrix { m: self.m, columns, keys })
    }

    /// Copy of the tensor with every trajectory in `J1 × J2` set to zero.
    pub fn zero_block(&self, rows: &IndexSet, cols: &IndexSet) -> Result<Tensor3> {
        self.check_bounds(rows, cols)?;
        let mut out = self.clone();
        for &j1 in rows.iter() {
            for &j2 in cols.iter() {
                let start = out.offset(j1, j2, 0);
                out.data[start..start + self.m].fill(0.0);
            }
        }
        Ok(out)
    }

    fn check_bounds(&self, rows: &IndexSet, cols: &IndexSet) -> Result<()> {
        if rows.bound() != self.n1 {
            return Err(Error::arg(format!(
                "row index set bound {} does not match n1 = {}",
                rows.bound(),
                self.n1
            )));
        }
        if cols.bound() != self.n2 {
            return Err(Error::arg(format!(
                "column index set bound {} does not match n2 = {}",
                cols.bound(),
                self.n2
            )));
        }
        Ok(())
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Entrywise product with a scalar.
    pub fn scaled(&self, factor: f64) -> Result<Tensor3> {
        Tensor3::new(
            self.n1,
            self.n2,
            self.m,
            self.data.iter().map(|x| x * factor).collect(),
        )
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::arg(format!(
                "matrix {rows}x{cols} needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::arg("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        self.data[r * self.cols + c]
    }

    #[inline]
    pub(crate) fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Sorted set of distinct indices below an exclusive bound.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    indices: Vec<usize>,
    bound: usize,
}

impl IndexSet {
    /// Accepts indices in any order; rejects duplicates and out-of-range values.
    pub fn new(mut indices: Vec<usize>, bound: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::arg(format!("duplicate index {} in index set", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= bound {
                return Err(Error::Index { axis: "index set", index: last, len: bound });
            }
        }
        Ok(Self { indices, bound })
    }

    pub fn empty(bound: usize) -> Self {
        Self { indices: Vec::new(), bound }
    }

    /// `{0, 1, ..., bound - 1}`.
    pub fn full(bound: usize) -> Self {
        Self { indices: (0..bound).collect(), bound }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.indices.iter()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::new();
        let (mut a, mut b) = (self.indices.iter().peekable(), other.indices.iter().peekable());
        while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
            match x.cmp(&y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    out.push(x);
                    a.next();
                    b.next();
                }
            }
        }
        IndexSet { indices: out, bound: self.bound.min(other.bound) }
    }

    pub fn intersection_len(&self, other: &IndexSet) -> usize {
        self.intersection(other).len()
    }

    /// `[bound] \ self`.
    pub fn complement(&self) -> IndexSet {
        IndexSet {
            indices: (0..self.bound).filter(|i| !self.contains(*i)).collect(),
            bound: self.bound,
        }
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}

/// Trajectories of a block laid out as `m × count`, one column per `(j1, j2)`.
///
/// Columns are stored contiguously (column-major) so each trajectory stays a
/// single slice.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMatrix {
    m: usize,
    columns: Vec<f64>,
    keys: Vec<(usize, usize)>,
}

impl TrajectoryMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn count(&self) -> usize {
        self.keys.len()
    }

    pub fn keys(&self) -> &[(usize, usize)] {
        &self.keys
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i * self.m..(i + 1) * self.m]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.columns.chunks_exact(self.m)
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.columns.iter().map(|x| x * x).sum()
    }
}
