//! Planted-bicluster benchmark tensors, noise models, and the recovery rate.
//!
//! The signal is `X = Σ_r σ_r · u_r ⊗ w_r ⊗ v_r` where `u_r` and `w_r` are
//! uniform `1/√k` on disjoint random supports and every `v_r` is one shared
//! unit time profile. Noise is i.i.d. Gaussian: variance `σ_z²` inside the
//! union rectangle `J1 × J2`, variance 1 outside.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bicluster::{self, BiclusterSet, BlockSize, Method};
use crate::error::{Error, Result};
use crate::spectral::{DEFAULT_GAP_THRESHOLD, DEFAULT_MAX_RANK};
use crate::tensor::{IndexSet, Tensor3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseModel {
    /// Unit variance everywhere.
    #[serde(rename = "I")]
    I,
    /// Inside-block variance `max(0, 1 - σ1² / (m k²))`.
    #[serde(rename = "II")]
    II,
    /// Signal only.
    #[serde(rename = "none")]
    None,
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(NoiseModel::I),
            "II" | "ii" | "2" => Ok(NoiseModel::II),
            "none" => Ok(NoiseModel::None),
            other => Err(Error::arg(format!("unknown noise model {other:?}"))),
        }
    }
}

/// Shape of the shared time profile `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeProfile {
    /// `1/√m` in every entry.
    #[default]
    Constant,
    /// A seeded Gaussian direction normalized to unit length.
    Random,
}

impl std::str::FromStr for TimeProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(TimeProfile::Constant),
            "random" => Ok(TimeProfile::Random),
            other => Err(Error::arg(format!("unknown time profile {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n1: usize,
    pub n2: usize,
    pub m: usize,
    pub q: usize,
    pub k: usize,
    pub sigmas: Vec<f64>,
    pub noise_model: NoiseModel,
    pub seed: u64,
    pub time_profile: TimeProfile,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 || self.m == 0 {
            return Err(Error::arg("n1, n2 and m must be positive"));
        }
        if self.q == 0 || self.k == 0 {
            return Err(Error::arg("q and k must be positive"));
        }
        if self.q * self.k > self.n1.min(self.n2) {
            return Err(Error::arg(format!(
                "q*k = {} planted indices do not fit in min(n1, n2) = {}",
                self.q * self.k,
                self.n1.min(self.n2)
            )));
        }
        if self.sigmas.len() != self.q {
            return Err(Error::arg(format!(
                "expected {} signal strengths, got {}",
                self.q,
                self.sigmas.len()
            )));
        }
        if self.sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::arg("signal strengths must be finite and non-negative"));
        }
        if self.sigmas.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::arg("signal strengths must be non-increasing"));
        }
        Ok(())
    }
}

/// Planted structure behind a synthetic tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub row_sets: Vec<IndexSet>,
    pub col_sets: Vec<IndexSet>,
    pub u_vectors: Vec<Vec<f64>>,
    pub w_vectors: Vec<Vec<f64>>,
    pub v_vectors: Vec<Vec<f64>>,
    pub sigmas: Vec<f64>,
    /// Realized inside-block noise standard deviation; 0 for signal only.
    pub sigma_z: f64,
    pub seed: u64,
}

impl GroundTruth {
    pub fn q(&self) -> usize {
        self.row_sets.len()
    }

    /// Union of planted row sets `J1`.
    pub fn row_union(&self) -> IndexSet {
        union(&self.row_sets)
    }

    /// Union of planted column sets `J2`.
    pub fn col_union(&self) -> IndexSet {
        union(&self.col_sets)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TruthDoc::from(self))?)
    }

    /// Reads the persisted fields; the unit vectors are not stored and come
    /// back empty.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TruthDoc = serde_json::from_str(text)?;
        let to_sets = |sets: Vec<Vec<usize>>, bound| {
            sets.into_iter()
                .map(|s| IndexSet::new(s, bound))
                .collect::<Result<Vec<_>>>()
        };
        let row_sets = to_sets(doc.row_sets, doc.n1)?;
        let col_sets = to_sets(doc.col_sets, doc.n2)?;
        if row_sets.len() != col_sets.len() || row_sets.len() != doc.sigmas.len() {
            return Err(Error::Data("truth file has inconsistent bicluster counts".into()));
        }
        Ok(GroundTruth {
            row_sets,
            col_sets,
            u_vectors: Vec::new(),
            w_vectors: Vec::new(),
            v_vectors: Vec::new(),
            sigmas: doc.sigmas,
            sigma_z: doc.sigma_z,
            seed: doc.seed,
        })
    }
}

fn union(sets: &[IndexSet]) -> IndexSet {
    let bound = sets.first().map_or(0, IndexSet::bound);
    let mut all: Vec<usize> = sets.iter().flat_map(|s| s.iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    IndexSet::new(all, bound).expect("union of valid sets is valid")
}

#[derive(Serialize, Deserialize)]
struct TruthDoc {
    n1: usize,
    n2: usize,
    row_sets: Vec<Vec<usize>>,
    col_sets: Vec<Vec<usize>>,
    sigmas: Vec<f64>,
    sigma_z: f64,
    seed: u64,
}

impl From<&GroundTruth> for TruthDoc {
    fn from(t: &GroundTruth) -> Self {
        TruthDoc {
            n1: t.row_sets.first().map_or(0, IndexSet::bound),
            n2: t.col_sets.first().map_or(0, IndexSet::bound),
            row_sets: t.row_sets.iter().map(|s| s.as_slice().to_vec()).collect(),
            col_sets: t.col_sets.iter().map(|s| s.as_slice().to_vec()).collect(),
            sigmas: t.sigmas.clone(),
            sigma_z: t.sigma_z,
            seed: t.seed,
        }
    }
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STREAM_SUPPORT: u64 = 1;
const STREAM_PROFILE: u64 = 2;
const STREAM_NOISE: u64 = 3;

/// Standard normal draws by Box–Muller over a ChaCha8 stream.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the log finite
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// `q` disjoint random `k`-subsets of `[n]`.
fn disjoint_supports(rng: &mut ChaCha8Rng, n: usize, q: usize, k: usize) -> Vec<IndexSet> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm.chunks_exact(k)
        .take(q)
        .map(|chunk| IndexSet::new(chunk.to_vec(), n).expect("permutation chunk is valid"))
        .collect()
}

fn indicator_vector(support: &IndexSet) -> Vec<f64> {
    let weight = 1.0 / (support.len() as f64).sqrt();
    let mut v = vec![0.0; support.bound()];
    for &i in support {
        v[i] = weight;
    }
    v
}

/// Noiseless planted tensor and its ground truth (`sigma_z = 0`).
pub fn build_signal(spec: &SyntheticSpec) -> Result<(Tensor3, GroundTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, STREAM_SUPPORT));
    let row_sets = disjoint_supports(&mut rng, spec.n1, spec.q, spec.k);
    let col_sets = disjoint_supports(&mut rng, spec.n2, spec.q, spec.k);

    let profile = match spec.time_profile {
        TimeProfile::Constant => vec![1.0 / (spec.m as f64).sqrt(); spec.m],
        TimeProfile::Random => random_unit_vector(spec.m, mix_seed(spec.seed, STREAM_PROFILE)),
    };

    let u_vectors: Vec<Vec<f64>> = row_sets.iter().map(indicator_vector).collect();
    let w_vectors: Vec<Vec<f64>> = col_sets.iter().map(indicator_vector).collect();
    let v_vectors = vec![profile; spec.q];

    let mut tensor = Tensor3::zeros(spec.n1, spec.n2, spec.m)?;
    let (n2, m) = (spec.n2, spec.m);
    let data = tensor.data_mut();
    for r in 0..spec.q {
        let (u, w, v) = (&u_vectors[r], &w_vectors[r], &v_vectors[r]);
        for &j1 in &row_sets[r] {
            for &j2 in &col_sets[r] {
                let amp = spec.sigmas[r] * u[j1] * w[j2];
                let start = (j1 * n2 + j2) * m;
                for (x, vt) in data[start..start + m].iter_mut().zip(v) {
                    *x += amp * vt;
                }
            }
        }
    }

    let truth = GroundTruth {
        row_sets,
        col_sets,
        u_vectors,
        w_vectors,
        v_vectors,
        sigmas: spec.sigmas.clone(),
        sigma_z: 0.0,
        seed: spec.seed,
    };
    Ok((tensor, truth))
}

fn random_unit_vector(m: usize, seed: u64) -> Vec<f64> {
    let mut gauss = GaussianStream::new(seed);
    loop {
        let v: Vec<f64> = (0..m).map(|_| gauss.next_normal()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Standard deviation of inside-block noise.
pub fn noise_sigma(model: NoiseModel, sigma1: f64, m: usize, k: usize) -> f64 {
    match model {
        NoiseModel::I => 1.0,
        NoiseModel::II => {
            let mk2 = m as f64 * (k as f64).powi(2);
            (1.0 - sigma1 * sigma1 / mk2).max(0.0).sqrt()
        }
        NoiseModel::None => 0.0,
    }
}

/// Adds independent Gaussian noise in storage order: `N(0, σ_z²)` inside
/// the planted rectangle `J1 × J2`, `N(0, 1)` elsewhere. Model `None`
/// returns the input unchanged.
pub fn add_noise(
    x: &Tensor3,
    truth: &GroundTruth,
    model: NoiseModel,
    sigma1: f64,
    seed: u64,
) -> Result<Tensor3> {
    if model == NoiseModel::None {
        return Ok(x.clone());
    }
    let rows = truth.row_union();
    let cols = truth.col_union();
    if rows.bound() != x.n1() || cols.bound() != x.n2() {
        return Err(Error::arg("ground truth does not match the tensor shape"));
    }
    let k = truth.row_sets.first().map_or(1, IndexSet::len);
    let sigma_z = noise_sigma(model, sigma1, x.m(), k);
    let mut gauss = GaussianStream::new(seed);
    let mut out = x.clone();
    let (n2, m) = (x.n2(), x.m());
    for (pos, fiber) in out.data_mut().chunks_exact_mut(m).enumerate() {
        let (j1, j2) = (pos / n2, pos % n2);
        let scale = if rows.contains(j1) && cols.contains(j2) { sigma_z } else { 1.0 };
        for value in fiber {
            *value += scale * gauss.next_normal();
        }
    }
    Ok(out)
}

/// Signal plus noise for `spec`; the noise stream is derived from the seed.
pub fn generate(spec: &SyntheticSpec) -> Result<(Tensor3, GroundTruth)> {
    let (signal, mut truth) = build_signal(spec)?;
    let sigma1 = spec.sigmas[0];
    let tensor = add_noise(
        &signal,
        &truth,
        spec.noise_model,
        sigma1,
        mix_seed(spec.seed, STREAM_NOISE),
    )?;
    truth.sigma_z = noise_sigma(spec.noise_model, sigma1, spec.m, spec.k);
    Ok((tensor, truth))
}

/// Fraction of planted indices recovered, `(1 / 2qk) Σ_i |Ĵ1 ∩ J1| + |Ĵ2 ∩ J2|`,
/// under the pairing of found to planted biclusters that maximizes it.
pub fn recovery_rate(found: &BiclusterSet, truth: &GroundTruth, k: usize) -> Result<f64> {
    let q = truth.q();
    if found.len() != q {
        return Err(Error::arg(format!(
            "found {} biclusters but the truth has {q}",
            found.len()
        )));
    }
    if q == 0 || k == 0 {
        return Err(Error::arg("recovery rate needs q >= 1 and k >= 1"));
    }
    // overlap[i][j]: planted i against found j
    let overlap: Vec<Vec<usize>> = (0..q)
        .map(|i| {
            found
                .biclusters
                .iter()
                .map(|b| {
                    b.rows.intersection_len(&truth.row_sets[i])
                        + b.cols.intersection_len(&truth.col_sets[i])
                })
                .collect()
        })
        .collect();
    let best = best_assignment(&overlap);
    Ok(best as f64 / (2 * q * k) as f64)
}

/// Maximum total weight over one-to-one pairings. Exhaustive for up to
/// eight biclusters, greedy beyond that.
fn best_assignment(weights: &[Vec<usize>]) -> usize {
    let q = weights.len();
    if q <= 8 {
        fn search(weights: &[Vec<usize>], row: usize, used: &mut Vec<bool>) -> usize {
            if row == weights.len() {
                return 0;
            }
            let mut best = 0;
            for j in 0..used.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.max(weights[row][j] + search(weights, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        search(weights, 0, &mut vec![false; q])
    } else {
        let mut used = vec![false; q];
        let mut total = 0;
        let mut cells: Vec<(usize, usize, usize)> = (0..q)
            .flat_map(|i| (0..q).map(move |j| (i, j)))
            .map(|(i, j)| (weights[i][j], i, j))
            .collect();
        cells.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut row_done = vec![false; q];
        for (w, i, j) in cells {
            if !row_done[i] && !used[j] {
                row_done[i] = true;
                used[j] = true;
                total += w;
            }
        }
        total
    }
}

/// One row of a recovery sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub sigma1: f64,
    pub mean_recovery: f64,
    pub std_recovery: f64,
    pub reps: usize,
}

/// Signal strengths for a sweep point: `σ1`, then each next one `2/3` of
/// the previous.
pub fn sweep_sigmas(sigma1: f64, q: usize) -> Vec<f64> {
    std::iter::successors(Some(sigma1), |s| Some(s * 2.0 / 3.0)).take(q).collect()
}

/// Mean recovery rate over `repetitions` planted tensors per `σ1`.
///
/// `base` supplies everything but the signal strengths. Repetition `i`
/// uses seed `mix_seed(base.seed, i)` at every grid point, so curves are
/// deterministic and compare like with like across `σ1`.
pub fn sweep_sigma(
    base: &SyntheticSpec,
    sigma1_grid: &[f64],
    repetitions: usize,
    method: Method,
) -> Result<Vec<SweepPoint>> {
    if repetitions == 0 {
        return Err(Error::arg("repetitions must be at least 1"));
    }
    if sigma1_grid.is_empty() {
        return Err(Error::arg("sigma grid is empty"));
    }
    let sizes = vec![BlockSize::square(base.k); base.q];
    sigma1_grid
        .iter()
        .map(|&sigma1| {
            let rates = (0..repetitions)
                .into_par_iter()
                .map(|rep| {
                    let spec = SyntheticSpec {
                        sigmas: sweep_sigmas(sigma1, base.q),
                        seed: mix_seed(base.seed, rep as u64),
                        ..base.clone()
                    };
                    let (tensor, truth) = generate(&spec)?;
                    let found = match method {
                        Method::Single if base.q != 1 => {
                            return Err(Error::arg("the single method needs q = 1"))
                        }
                        _ => bicluster::solve(
                            &tensor,
                            method,
                            &sizes,
                            DEFAULT_MAX_RANK,
                            DEFAULT_GAP_THRESHOLD,
                        )?,
                    };
                    // auto may pick a different count; score what overlaps
                    score_any_count(&found, &truth, base.k)
                })
                .collect::<Result<Vec<f64>>>()?;
            let n = rates.len() as f64;
            let mean = rates.iter().sum::<f64>() / n;
            let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
            Ok(SweepPoint {
                sigma1,
                mean_recovery: mean,
                std_recovery: var.sqrt(),
                reps: repetitions,
            })
        })
        .collect()
}

/// Recovery rate that tolerates a found count different from `q` by
/// padding with empty matches or keeping the best `q` found biclusters.
fn score_any_count(found: &BiclusterSet, truth: &GroundTruth, k: usize) -> Result<f64> {
    let q = truth.q();
    if found.len() == q {
        return recovery_rate(found, truth, k);
    }
    let overlap: Vec<Vec<usize>> = (0..q)
        .map(|i| {
            (0..q)
                .map(|j| {
                    found.biclusters.get(j).map_or(0, |b| {
                        b.rows.intersection_len(&truth.row_sets[i])
                            + b.cols.intersection_len(&truth.col_sets[i])
                    })
                })
                .collect()
        })
        .collect();
    Ok(best_assignment(&overlap) as f64 / (2 * q * k) as f64)
}

/// CSV with header `sigma1,mean_recovery,std_recovery,reps`.
pub fn sweep_to_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("sigma1,mean_recovery,std_recovery,reps\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.sigma1, p.mean_recovery, p.std_recovery, p.reps
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bicluster::Bicluster;

    fn spec(n: usize, m: usize, q: usize, k: usize, sigmas: &[f64], noise: NoiseModel) -> SyntheticSpec {
        SyntheticSpec {
            n1: n,
            n2: n,
            m,
            q,
            k,
            sigmas: sigmas.to_vec(),
            noise_model: noise,
            seed: 17,
            time_profile: TimeProfile::Constant,
        }
    }

    fn as_found(truth: &GroundTruth, method: Method) -> BiclusterSet {
        let biclusters = truth
            .row_sets
            .iter()
            .zip(&truth.col_sets)
            .enumerate()
            .map(|(i, (r, c))| Bicluster {
                rows: r.clone(),
                cols: c.clone(),
                rank_position: i + 1,
                row_eigenvalue: 0.0,
                col_eigenvalue: 0.0,
                warnings: vec![],
            })
            .collect::<Vec<_>>();
        let mut ri = biclusters[0].rows.clone();
        let mut ci = biclusters[0].cols.clone();
        for b in &biclusters[1..] {
            ri = ri.intersection(&b.rows);
            ci = ci.intersection(&b.cols);
        }
        BiclusterSet { method, biclusters, row_intersection: ri, col_intersection: ci }
    }

    #[test]
    fn scalar_signal() {
        let (x, truth) = build_signal(&spec(1, 1, 1, 1, &[5.0], NoiseModel::None)).unwrap();
        assert_eq!(x.as_slice(), &[5.0]);
        assert_eq!(truth.u_vectors, vec![vec![1.0]]);
    }

    #[test]
    fn spec_validation() {
        assert!(spec(10, 4, 2, 6, &[2.0, 1.0], NoiseModel::I).validate().is_err());
        assert!(spec(10, 4, 2, 5, &[1.0, 2.0], NoiseModel::I).validate().is_err());
        assert!(spec(10, 4, 2, 5, &[1.0], NoiseModel::I).validate().is_err());
        assert!(spec(10, 4, 1, 5, &[-1.0], NoiseModel::I).validate().is_err());
        assert!(spec(10, 4, 2, 5, &[2.0, 1.0], NoiseModel::I).validate().is_ok());
    }

    #[test]
    fn truth_invariants_and_block_norms() {
        let s = spec(30, 7, 3, 6, &[9.0, 5.0, 2.0], NoiseModel::None);
        let (x, truth) = build_signal(&s).unwrap();
        for r in 0..3 {
            let u = &truth.u_vectors[r];
            assert!((u.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(u.iter().enumerate().all(|(i, &a)| a == 0.0 || truth.row_sets[r].contains(i)));
            let v = &truth.v_vectors[r];
            assert!((v.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() < 1e-12);
            let block = x.unfold_block(&truth.row_sets[r], &truth.col_sets[r]).unwrap();
            assert!((block.frobenius_norm_sq().sqrt() - s.sigmas[r]).abs() < 1e-12);
            for other in (r + 1)..3 {
                assert!(truth.row_sets[r].intersection(&truth.row_sets[other]).is_empty());
                assert!(truth.col_sets[r].intersection(&truth.col_sets[other]).is_empty());
            }
        }
        let energy: f64 = s.sigmas.iter().map(|s| s * s).sum();
        assert!((x.frobenius_norm_sq() - energy).abs() < 1e-10);
    }

    #[test]
    fn planted_trajectories_have_closed_form() {
        let s = spec(150, 40, 2, 30, &[150.0, 100.0], NoiseModel::None);
        let (x, truth) = build_signal(&s).unwrap();
        for r in 0..2 {
            let level = s.sigmas[r] / (30.0 * 40f64.sqrt());
            for &a in &truth.row_sets[r] {
                for &b in &truth.col_sets[r] {
                    for &val in x.trajectory(a, b).unwrap() {
                        assert!((val - level).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn noise_sigma_values() {
        assert_eq!(noise_sigma(NoiseModel::I, 123.0, 4, 5), 1.0);
        assert_eq!(noise_sigma(NoiseModel::II, 10.0, 4, 5), 0.0);
        assert_eq!(noise_sigma(NoiseModel::II, 500.0, 40, 30), 0.0);
        let want = 0.6f64.sqrt();
        assert!((noise_sigma(NoiseModel::II, 120.0, 40, 30) - want).abs() < 1e-15);
        assert_eq!(noise_sigma(NoiseModel::None, 1.0, 1, 1), 0.0);
    }

    #[test]
    fn zero_inside_variance_keeps_signal() {
        // σ1² > m k² puts model II in the high-SNR regime
        let s = spec(12, 4, 1, 3, &[10.0], NoiseModel::II);
        let (x, truth) = build_signal(&s).unwrap();
        let t = add_noise(&x, &truth, NoiseModel::II, 10.0, 5).unwrap();
        for a in 0..12 {
            for b in 0..12 {
                let inside = truth.row_sets[0].contains(a) && truth.col_sets[0].contains(b);
                for tau in 0..4 {
                    if inside {
                        assert_eq!(t.get(a, b, tau), x.get(a, b, tau));
                    } else {
                        assert_ne!(t.get(a, b, tau), x.get(a, b, tau));
                    }
                }
            }
        }
    }

    #[test]
    fn model_i_outside_variance_is_one() {
        let s = spec(150, 40, 1, 30, &[50.0], NoiseModel::I);
        let (t, truth) = generate(&s).unwrap();
        let (rows, cols) = (truth.row_union(), truth.col_union());
        let (mut sum, mut sum_sq, mut count) = (0.0, 0.0, 0usize);
        for a in 0..150 {
            for b in 0..150 {
                if rows.contains(a) && cols.contains(b) {
                    continue;
                }
                for &z in t.trajectory(a, b).unwrap() {
                    sum += z;
                    sum_sq += z * z;
                    count += 1;
                }
            }
        }
        let mean = sum / count as f64;
        let var = sum_sq / count as f64 - mean * mean;
        assert!((0.99..=1.01).contains(&var), "variance {var}");
    }

    #[test]
    fn seeds_control_the_stream() {
        let s = spec(10, 3, 1, 3, &[2.0], NoiseModel::I);
        let (a, ta) = generate(&s).unwrap();
        let (b, tb) = generate(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let (c, _) = generate(&SyntheticSpec { seed: 18, ..s }).unwrap();
        assert_ne!(a.get(0, 0, 0), c.get(0, 0, 0));
    }

    #[test]
    fn gaussian_stream_moments() {
        let mut g = GaussianStream::new(3);
        let xs: Vec<f64> = (0..200_000).map(|_| g.next_normal()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.01);
    }

    #[test]
    fn recovery_extremes() {
        let s = spec(20, 3, 2, 4, &[3.0, 2.0], NoiseModel::None);
        let (_, truth) = build_signal(&s).unwrap();
        let exact = as_found(&truth, Method::Multiple);
        assert_eq!(recovery_rate(&exact, &truth, 4).unwrap(), 1.0);

        // swapped order still scores 1 under the best pairing
        let mut swapped = exact.clone();
        swapped.biclusters.reverse();
        assert_eq!(recovery_rate(&swapped, &truth, 4).unwrap(), 1.0);

        // sets drawn from the complement of the planted union
        let rest_r = truth.row_union().complement();
        let rest_c = truth.col_union().complement();
        let mut disjoint = exact.clone();
        for (i, b) in disjoint.biclusters.iter_mut().enumerate() {
            b.rows = IndexSet::new(rest_r.as_slice()[4 * i..4 * i + 4].to_vec(), 20).unwrap();
            b.cols = IndexSet::new(rest_c.as_slice()[4 * i..4 * i + 4].to_vec(), 20).unwrap();
        }
        assert_eq!(recovery_rate(&disjoint, &truth, 4).unwrap(), 0.0);
    }

    #[test]
    fn recovery_partial_hand_count() {
        let s = spec(20, 3, 2, 2, &[3.0, 2.0], NoiseModel::None);
        let (_, truth) = build_signal(&s).unwrap();
        let mut found = as_found(&truth, Method::Multiple);
        // keep one planted row of bicluster 1, replace the other with an unplanted row
        let spare = truth.row_union().complement().as_slice()[0];
        let keep = truth.row_sets[0].as_slice()[0];
        found.biclusters[0].rows = IndexSet::new(vec![keep, spare], 20).unwrap();
        assert_eq!(recovery_rate(&found, &truth, 2).unwrap(), 7.0 / 8.0);
    }

    #[test]
    fn recovery_rejects_count_mismatch() {
        let s = spec(20, 3, 2, 2, &[3.0, 2.0], NoiseModel::None);
        let (_, truth) = build_signal(&s).unwrap();
        let mut found = as_found(&truth, Method::Multiple);
        found.biclusters.pop();
        assert!(recovery_rate(&found, &truth, 2).is_err());
    }

    #[test]
    fn truth_json_round_trip() {
        let s = spec(20, 3, 2, 4, &[3.0, 2.0], NoiseModel::II);
        let (_, truth) = generate(&s).unwrap();
        let text = truth.to_json().unwrap();
        for key in ["row_sets", "col_sets", "sigmas", "sigma_z", "seed"] {
            assert!(text.contains(key));
        }
        let back = GroundTruth::from_json(&text).unwrap();
        assert_eq!(back.row_sets, truth.row_sets);
        assert_eq!(back.col_sets, truth.col_sets);
        assert_eq!(back.sigma_z, truth.sigma_z);
    }

    #[test]
    fn sweep_noiseless_point_is_exact() {
        let base = spec(40, 6, 2, 5, &[1.0, 1.0], NoiseModel::None);
        let pts = sweep_sigma(&base, &[30.0], 1, Method::Multiple).unwrap();
        assert_eq!(pts[0].mean_recovery, 1.0);
        assert_eq!(pts[0].reps, 1);
        let csv = sweep_to_csv(&pts);
        assert!(csv.starts_with("sigma1,mean_recovery,std_recovery,reps\n30,1,0,1\n"));
        assert!(sweep_sigma(&base, &[], 1, Method::Multiple).is_err());
        assert!(sweep_sigma(&base, &[1.0], 0, Method::Multiple).is_err());
    }

    #[test]
    fn sweep_sigmas_follow_two_thirds() {
        assert_eq!(sweep_sigmas(90.0, 2), vec![90.0, 60.0]);
    }

    #[test]
    fn greedy_assignment_for_many_biclusters() {
        let w: Vec<Vec<usize>> =
            (0..10).map(|i| (0..10).map(|j| if i == j { 5 } else { 1 }).collect()).collect();
        assert_eq!(best_assignment(&w), 50);
    }
}
