//! Tensor biclustering for `individuals × features × time` data.
//!
//! A bicluster is a pair of index sets `(J1, J2)` whose trajectories
//! `T(j1, j2, :)` lie near a low-dimensional subspace. Extraction works by
//! folding the tensor into two covariance matrices, one over individuals and
//! one over features, and reading the index sets off their top eigenvectors.
//!
//! Module map:
//!
//! - [`tensor`]: dense third-order storage, slices, fibers, block unfolding.
//! - [`spectral`]: covariance folding, a Jacobi eigensolver, gap-based rank estimation.
//! - [`bicluster`]: single, recursive and multiple bicluster extraction.
//! - [`synthetic`]: planted-signal generator, noise models, recovery rate, sweeps.
//! - [`evaluation`]: trajectory correlation reports and length statistics.
//! - [`tns`] and [`ingest`]: file formats.

pub mod bicluster;
pub mod error;
pub mod evaluation;
pub mod ingest;
pub mod spectral;
pub mod synthetic;
pub mod tensor;
pub mod tns;

pub use bicluster::{
    auto_biclusters, fs_single, multiple_biclusters, recursive_biclusters, top_k_indices,
    Bicluster, BiclusterSet, BlockSize, Method, Warning,
};
pub use error::{Error, Result};
pub use evaluation::{block_length_stats, correlation_report, CorrelationReport, LengthStats};
pub use spectral::{
    eigen_sym, estimate_rank_by_gap, fold_covariance_cols, fold_covariance_rows, top_eigenpairs,
    EigenPairs, SymMatrix,
};
pub use synthetic::{
    add_noise, build_signal, generate, noise_sigma, recovery_rate, sweep_sigma, GroundTruth,
    NoiseModel, SyntheticSpec,
};
pub use tensor::{IndexSet, Matrix, Tensor3, TrajectoryMatrix};
