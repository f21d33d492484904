//! Bicluster extraction by tensor folding and spectral decomposition.
//!
//! - [`fs_single`]: one bicluster from the top eigenvector of each folding.
//! - [`recursive_biclusters`]: repeat `fs_single`, zeroing each found block.
//! - [`multiple_biclusters`]: the `i`-th bicluster from the `i`-th
//!   eigenvectors of both foldings, plus the intersection of all row sets
//!   and of all column sets.
//! - [`auto_biclusters`]: picks the number of biclusters from eigenvalue gaps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{self, fold_covariances, EigenPairs, SymMatrix};
use crate::tensor::{IndexSet, Tensor3};

/// Relative size below which a top eigenvalue counts as degenerate.
const DEGENERATE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Single,
    Recursive,
    Multiple,
    Auto,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Method::Single),
            "recursive" => Ok(Method::Recursive),
            "multiple" => Ok(Method::Multiple),
            "auto" => Ok(Method::Auto),
            other => Err(Error::arg(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Single => "single",
            Method::Recursive => "recursive",
            Method::Multiple => "multiple",
            Method::Auto => "auto",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Warning {
    /// Top eigenvalue is (numerically) zero or tied with the next one, so
    /// the eigenvector and the selected indices are not well determined.
    DegenerateSpectrum,
    /// Automatic rank selection found no eigenvalue gap and fell back to one.
    NoGapDetected,
}

/// Requested cardinalities `(|rows|, |cols|)` of one bicluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSize {
    pub rows: usize,
    pub cols: usize,
}

impl BlockSize {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub fn square(k: usize) -> Self {
        Self { rows: k, cols: k }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bicluster {
    pub rows: IndexSet,
    pub cols: IndexSet,
    /// 1-based position of the eigenvector pair that produced this bicluster.
    pub rank_position: usize,
    pub row_eigenvalue: f64,
    pub col_eigenvalue: f64,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiclusterSet {
    pub method: Method,
    pub biclusters: Vec<Bicluster>,
    pub row_intersection: IndexSet,
    pub col_intersection: IndexSet,
}

impl BiclusterSet {
    fn new(method: Method, biclusters: Vec<Bicluster>) -> Self {
        let (row_intersection, col_intersection) = intersections(&biclusters);
        Self { method, biclusters, row_intersection, col_intersection }
    }

    pub fn len(&self) -> usize {
        self.biclusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.biclusters.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = BiclusterSetDoc::from(self);
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BiclusterSetDoc = serde_json::from_str(text)?;
        doc.into_set()
    }
}

fn intersections(biclusters: &[Bicluster]) -> (IndexSet, IndexSet) {
    let mut iter = biclusters.iter();
    match iter.next() {
        None => (IndexSet::empty(0), IndexSet::empty(0)),
        Some(first) => iter.fold((first.rows.clone(), first.cols.clone()), |(r, c), b| {
            (r.intersection(&b.rows), c.intersection(&b.cols))
        }),
    }
}

/// Indices of the `k` largest `|v[i]|`, ties toward the smaller index,
/// returned in ascending order.
pub fn top_k_indices(v: &[f64], k: usize) -> Result<IndexSet> {
    if k == 0 || k > v.len() {
        return Err(Error::arg(format!(
            "cannot select {k} indices from a vector of length {}",
            v.len()
        )));
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    // stable sort keeps smaller indices first among equal magnitudes
    order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));
    order.truncate(k);
    IndexSet::new(order, v.len())
}

fn check_size(t: &Tensor3, size: BlockSize) -> Result<()> {
    if size.rows == 0 || size.rows > t.n1() {
        return Err(Error::arg(format!(
            "row cardinality {} must be in 1..={}",
            size.rows,
            t.n1()
        )));
    }
    if size.cols == 0 || size.cols > t.n2() {
        return Err(Error::arg(format!(
            "column cardinality {} must be in 1..={}",
            size.cols,
            t.n2()
        )));
    }
    Ok(())
}

/// Whether eigenpair `i` sits on a zero or tied eigenvalue.
fn is_degenerate(pairs: &EigenPairs, i: usize, trace: f64) -> bool {
    let values = pairs.values();
    let lambda = values[i];
    if lambda <= DEGENERATE_REL * trace.abs() || lambda <= 0.0 {
        return true;
    }
    let tied = |j: usize| (values[j] - lambda).abs() <= DEGENERATE_REL * lambda;
    (i > 0 && tied(i - 1)) || (i + 1 < values.len() && tied(i + 1))
}

/// Spectral decomposition of both foldings.
struct FoldedSpectra {
    c1: SymMatrix,
    c2: SymMatrix,
    rows: EigenPairs,
    cols: EigenPairs,
}

impl FoldedSpectra {
    fn compute(t: &Tensor3) -> Result<Self> {
        let (c1, c2) = fold_covariances(t);
        let (rows, cols) = rayon::join(|| spectral::eigen_sym(&c1), || spectral::eigen_sym(&c2));
        Ok(Self { rows: rows?, cols: cols?, c1, c2 })
    }

    /// Bicluster from eigenvector pair `i` (0-based).
    fn bicluster(&self, i: usize, size: BlockSize) -> Result<Bicluster> {
        let rows = top_k_indices(&self.rows.vector(i), size.rows)?;
        let cols = top_k_indices(&self.cols.vector(i), size.cols)?;
        let mut warnings = Vec::new();
        if is_degenerate(&self.rows, i, self.c1.trace())
            || is_degenerate(&self.cols, i, self.c2.trace())
        {
            warnings.push(Warning::DegenerateSpectrum);
        }
        Ok(Bicluster {
            rows,
            cols,
            rank_position: i + 1,
            row_eigenvalue: self.rows.values()[i],
            col_eigenvalue: self.cols.values()[i],
            warnings,
        })
    }
}

/// Single bicluster from the top eigenvectors of both foldings.
pub fn fs_single(t: &Tensor3, k1: usize, k2: usize) -> Result<Bicluster> {
    let size = BlockSize::new(k1, k2);
    check_size(t, size)?;
    FoldedSpectra::compute(t)?.bicluster(0, size)
}

/// Extracts `sizes.len()` biclusters one at a time, zeroing the block
/// `rows × cols × [m]` of each before searching for the next.
///
/// Only the block is cleared, so later biclusters may reuse rows or columns
/// of earlier ones. The intersections are reported as diagnostics.
pub fn recursive_biclusters(t: &Tensor3, sizes: &[BlockSize]) -> Result<BiclusterSet> {
    if sizes.is_empty() {
        return Err(Error::arg("recursive extraction needs at least one block size"));
    }
    for &size in sizes {
        check_size(t, size)?;
    }
    let mut current = t.clone();
    let mut found = Vec::with_capacity(sizes.len());
    for (step, &size) in sizes.iter().enumerate() {
        let bicluster = FoldedSpectra::compute(&current)?.bicluster(0, size)?;
        if step + 1 < sizes.len() {
            current = current.zero_block(&bicluster.rows, &bicluster.cols)?;
        }
        found.push(bicluster);
    }
    Ok(BiclusterSet::new(Method::Recursive, found))
}

/// All biclusters at once: bicluster `i` is read from the `i`-th eigenvectors
/// of both foldings.
pub fn multiple_biclusters(t: &Tensor3, sizes: &[BlockSize]) -> Result<BiclusterSet> {
    multiple_with_method(t, sizes, Method::Multiple)
}

fn multiple_with_method(t: &Tensor3, sizes: &[BlockSize], method: Method) -> Result<BiclusterSet> {
    let r = sizes.len();
    if r == 0 || r > t.n1().min(t.n2()) {
        return Err(Error::arg(format!(
            "number of biclusters {r} must be in 1..={}",
            t.n1().min(t.n2())
        )));
    }
    for &size in sizes {
        check_size(t, size)?;
    }
    let spectra = FoldedSpectra::compute(t)?;
    let biclusters = sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| spectra.bicluster(i, size))
        .collect::<Result<Vec<_>>>()?;
    Ok(BiclusterSet::new(method, biclusters))
}

/// Estimates the number of biclusters `r` from eigenvalue gaps of both
/// foldings (the smaller estimate wins), then runs the multiple method with
/// `r` copies of `(k1, k2)`.
pub fn auto_biclusters(
    t: &Tensor3,
    k1: usize,
    k2: usize,
    max_rank: usize,
    theta: f64,
) -> Result<BiclusterSet> {
    let size = BlockSize::new(k1, k2);
    check_size(t, size)?;
    if max_rank == 0 {
        return Err(Error::arg("max_rank must be at least 1"));
    }
    if !(theta.is_finite() && theta > 1.0) {
        return Err(Error::arg(format!("gap threshold must exceed 1, got {theta}")));
    }
    let spectra = FoldedSpectra::compute(t)?;
    let row_est = spectral::estimate_rank(spectra.rows.values(), max_rank, theta);
    let col_est = spectral::estimate_rank(spectra.cols.values(), max_rank, theta);
    let r = row_est.rank.min(col_est.rank).min(t.n1().min(t.n2()));
    let no_gap = !(row_est.gap_found && col_est.gap_found);

    let mut biclusters = (0..r)
        .map(|i| spectra.bicluster(i, size))
        .collect::<Result<Vec<_>>>()?;
    if no_gap {
        for b in &mut biclusters {
            b.warnings.push(Warning::NoGapDetected);
        }
    }
    Ok(BiclusterSet::new(Method::Auto, biclusters))
}

/// Dispatches on `method`. `Auto` uses the first size and the given gap
/// parameters; the other methods ignore them.
pub fn solve(
    t: &Tensor3,
    method: Method,
    sizes: &[BlockSize],
    max_rank: usize,
    theta: f64,
) -> Result<BiclusterSet> {
    match method {
        Method::Single => {
            let [size] = sizes else {
                return Err(Error::arg(format!(
                    "the single method takes exactly one block size, got {}",
                    sizes.len()
                )));
            };
            let b = fs_single(t, size.rows, size.cols)?;
            Ok(BiclusterSet::new(Method::Single, vec![b]))
        }
        Method::Recursive => recursive_biclusters(t, sizes),
        Method::Multiple => multiple_biclusters(t, sizes),
        Method::Auto => {
            let size = sizes
                .first()
                .ok_or_else(|| Error::arg("the auto method needs a block size"))?;
            auto_biclusters(t, size.rows, size.cols, max_rank, theta)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BiclusterDoc {
    rank_position: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    row_eigenvalue: f64,
    col_eigenvalue: f64,
    #[serde(default)]
    warnings: Vec<Warning>,
}

#[derive(Serialize, Deserialize)]
struct BiclusterSetDoc {
    method: Method,
    n1: usize,
    n2: usize,
    biclusters: Vec<BiclusterDoc>,
    row_intersection: Vec<usize>,
    col_intersection: Vec<usize>,
}

impl From<&BiclusterSet> for BiclusterSetDoc {
    fn from(set: &BiclusterSet) -> Self {
        let (n1, n2) = set
            .biclusters
            .first()
            .map_or((0, 0), |b| (b.rows.bound(), b.cols.bound()));
        BiclusterSetDoc {
            method: set.method,
            n1,
            n2,
            biclusters: set
                .biclusters
                .iter()
                .map(|b| BiclusterDoc {
                    rank_position: b.rank_position,
                    rows: b.rows.as_slice().to_vec(),
                    cols: b.cols.as_slice().to_vec(),
                    row_eigenvalue: b.row_eigenvalue,
                    col_eigenvalue: b.col_eigenvalue,
                    warnings: b.warnings.clone(),
                })
                .collect(),
            row_intersection: set.row_intersection.as_slice().to_vec(),
            col_intersection: set.col_intersection.as_slice().to_vec(),
        }
    }
}

impl BiclusterSetDoc {
    fn into_set(self) -> Result<BiclusterSet> {
        let biclusters = self
            .biclusters
            .into_iter()
            .map(|b| {
                Ok(Bicluster {
                    rows: IndexSet::new(b.rows, self.n1)?,
                    cols: IndexSet::new(b.cols, self.n2)?,
                    rank_position: b.rank_position,
                    row_eigenvalue: b.row_eigenvalue,
                    col_eigenvalue: b.col_eigenvalue,
                    warnings: b.warnings,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if biclusters.iter().any(|b| b.rows.is_empty() || b.cols.is_empty()) {
            return Err(Error::Data("bicluster with an empty index set".into()));
        }
        let set = BiclusterSet::new(self.method, biclusters);
        if set.row_intersection.as_slice() != self.row_intersection.as_slice()
            || set.col_intersection.as_slice() != self.col_intersection.as_slice()
        {
            return Err(Error::Data(
                "stored intersections disagree with the bicluster index sets".into(),
            ));
        }
        Ok(set)
    }
}
