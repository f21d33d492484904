//! Bicluster quality: pairwise trajectory correlations and trajectory
//! length statistics.

use rayon::prelude::*;

use crate::bicluster::Bicluster;
use crate::error::{Error, Result};
use crate::spectral::dot;
use crate::tensor::{IndexSet, Matrix, Tensor3};

/// How trajectories are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Similarity {
    /// Centered (Pearson) correlation.
    #[default]
    Pearson,
    /// Uncentered cosine similarity.
    Cosine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    /// Absolute correlations, `count × count`.
    pub matrix: Matrix,
    /// `(j1, j2)` label of each row and column.
    pub keys: Vec<(usize, usize)>,
    /// Trajectories with zero spread; they correlate 0 with everything else.
    pub constant: Vec<bool>,
    /// Mean of the off-diagonal entries, 0 for a single trajectory.
    pub mean_abs_corr: f64,
    /// Sum of the off-diagonal entries.
    pub total_abs_corr: f64,
}

impl CorrelationReport {
    pub fn n_traj(&self) -> usize {
        self.keys.len()
    }

    pub fn n_constant(&self) -> usize {
        self.constant.iter().filter(|&&c| c).count()
    }

    /// `mean_abs_corr=<v> n_traj=<n> n_constant=<c>`
    pub fn summary_line(&self) -> String {
        format!(
            "mean_abs_corr={} n_traj={} n_constant={}",
            self.mean_abs_corr,
            self.n_traj(),
            self.n_constant()
        )
    }

    /// Full matrix with a header row of `(j1,j2)` labels.
    pub fn to_csv(&self) -> String {
        let labels: Vec<String> =
            self.keys.iter().map(|(a, b)| format!("\"({a},{b})\"")).collect();
        let mut out = labels.join(",");
        out.push('\n');
        for r in 0..self.matrix.rows() {
            let row: Vec<String> = self.matrix.row(r).iter().map(f64::to_string).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Pearson correlation report for a bicluster.
pub fn correlation_report(t: &Tensor3, b: &Bicluster) -> Result<CorrelationReport> {
    correlation_report_with(t, &b.rows, &b.cols, Similarity::Pearson)
}

pub fn correlation_report_with(
    t: &Tensor3,
    rows: &IndexSet,
    cols: &IndexSet,
    similarity: Similarity,
) -> Result<CorrelationReport> {
    if t.m() < 2 {
        return Err(Error::arg("correlations need trajectories of length at least 2"));
    }
    let block = t.unfold_block(rows, cols)?;
    let count = block.count();

    // normalize each trajectory once; constant ones become None
    let normalized: Vec<Option<Vec<f64>>> = block
        .columns()
        .map(|col| {
            let mean = match similarity {
                Similarity::Pearson => col.iter().sum::<f64>() / col.len() as f64,
                Similarity::Cosine => 0.0,
            };
            let centered: Vec<f64> = col.iter().map(|x| x - mean).collect();
            let spread = dot(&centered, &centered).sqrt();
            let scale = dot(col, col).sqrt();
            if spread <= 1e-12 * scale || spread == 0.0 {
                None
            } else {
                Some(centered.into_iter().map(|x| x / spread).collect())
            }
        })
        .collect();

    let rows_out: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|i| {
            (0..count)
                .map(|j| {
                    if i == j {
                        return 1.0;
                    }
                    match (&normalized[i], &normalized[j]) {
                        (Some(a), Some(b)) => dot(a, b).abs().min(1.0),
                        _ => 0.0,
                    }
                })
                .collect()
        })
        .collect();

    let mut total = 0.0;
    for (i, row) in rows_out.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i != j {
                total += v;
            }
        }
    }
    let pairs = count * (count - 1);
    let mean = if pairs == 0 { 0.0 } else { total / pairs as f64 };
    let matrix = Matrix::new(count, count, rows_out.into_iter().flatten().collect())?;

    Ok(CorrelationReport {
        matrix,
        keys: block.keys().to_vec(),
        constant: normalized.iter().map(Option::is_none).collect(),
        mean_abs_corr: mean,
        total_abs_corr: total,
    })
}

/// Mean squared trajectory length inside `J1 × J2` and outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthStats {
    pub inside_mean_sq_len: f64,
    pub outside_mean_sq_len: f64,
    pub inside_count: usize,
    pub outside_count: usize,
}

pub fn block_length_stats(t: &Tensor3, rows: &IndexSet, cols: &IndexSet) -> Result<LengthStats> {
    if rows.bound() != t.n1() || cols.bound() != t.n2() {
        return Err(Error::arg("index set bounds do not match the tensor"));
    }
    let inside_count = rows.len() * cols.len();
    let outside_count = t.n1() * t.n2() - inside_count;
    if outside_count == 0 {
        return Err(Error::arg("the block covers every trajectory; its complement is empty"));
    }
    let (mut inside, mut outside) = (0.0, 0.0);
    for (pos, fiber) in t.as_slice().chunks_exact(t.m()).enumerate() {
        let (j1, j2) = (pos / t.n2(), pos % t.n2());
        let len_sq = dot(fiber, fiber);
        if rows.contains(j1) && cols.contains(j2) {
            inside += len_sq;
        } else {
            outside += len_sq;
        }
    }
    Ok(LengthStats {
        inside_mean_sq_len: if inside_count == 0 { 0.0 } else { inside / inside_count as f64 },
        outside_mean_sq_len: outside / outside_count as f64,
        inside_count,
        outside_count,
    })
}
