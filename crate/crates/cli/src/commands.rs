use std::fs;
use std::io::Write;
use std::path::Path;

use tensor_bicluster::bicluster::{self, BiclusterSet};
use tensor_bicluster::evaluation::{correlation_report_with, Similarity};
use tensor_bicluster::ingest::ingest_long_csv;
use tensor_bicluster::spectral::{self, fold_covariances};
use tensor_bicluster::synthetic::{self, SyntheticSpec};
use tensor_bicluster::{tns, Error, GroundTruth, Result, Tensor3};

use crate::args::{
    Command, EvalArgs, GenerateArgs, IngestArgs, SolveArgs, SpectrumArgs, SweepArgs, SynthArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Ingest(a) => ingest(a),
    }
}

/// Writes to a sibling temp file, then renames over `path`.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Argument(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_tensor(path: &Path) -> Result<Tensor3> {
    tns::read(fs::File::open(path)?)
}

fn synth_spec(s: &SynthArgs, sigmas: Vec<f64>) -> SyntheticSpec {
    SyntheticSpec {
        n1: s.n1,
        n2: s.n2,
        m: s.m,
        q: s.q,
        k: s.k,
        sigmas,
        noise_model: s.noise,
        seed: s.seed,
        time_profile: s.time_profile,
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let spec = synth_spec(&a.synth, a.sigma);
    let (tensor, truth) = synthetic::generate(&spec)?;
    write_atomic(&a.tensor, tns::to_string(&tensor).as_bytes())?;
    write_atomic(&a.truth, truth.to_json()?.as_bytes())?;
    println!("sigma_z={}", truth.sigma_z);
    println!(
        "wrote {}x{}x{} tensor to {} and truth to {}",
        spec.n1,
        spec.n2,
        spec.m,
        a.tensor.display(),
        a.truth.display()
    );
    Ok(())
}

fn solve(a: SolveArgs) -> Result<()> {
    let tensor = read_tensor(&a.input)?;
    let found = bicluster::solve(&tensor, a.method, &a.k.0, a.gap.max_rank, a.gap.theta)?;
    write_atomic(&a.out, found.to_json()?.as_bytes())?;
    for b in &found.biclusters {
        println!(
            "bicluster {}: rows={} cols={} row_eigenvalue={} col_eigenvalue={}",
            b.rank_position,
            b.rows.len(),
            b.cols.len(),
            b.row_eigenvalue,
            b.col_eigenvalue
        );
        for w in &b.warnings {
            eprintln!("warning: bicluster {}: {w:?}", b.rank_position);
        }
    }
    print_intersections(&found);
    Ok(())
}

fn print_intersections(found: &BiclusterSet) {
    println!(
        "row_intersection={} col_intersection={}",
        found.row_intersection.len(),
        found.col_intersection.len()
    );
}

fn eval(a: EvalArgs) -> Result<()> {
    if a.truth.is_none() && a.tensor.is_none() {
        return Err(Error::Argument("eval needs --truth and/or --tensor".into()));
    }
    let found = BiclusterSet::from_json(&fs::read_to_string(&a.result)?)?;
    println!("method={} biclusters={}", found.method, found.len());
    print_intersections(&found);

    if let Some(path) = &a.truth {
        let truth = GroundTruth::from_json(&fs::read_to_string(path)?)?;
        let k = truth.row_sets.first().map_or(0, |s| s.len());
        let rate = synthetic::recovery_rate(&found, &truth, k)?;
        println!("recovery={rate:?}");
    }

    if let Some(path) = &a.tensor {
        let tensor = read_tensor(path)?;
        let similarity = if a.raw_cosine { Similarity::Cosine } else { Similarity::Pearson };
        if let Some(dir) = &a.corr_dir {
            fs::create_dir_all(dir)?;
        }
        for b in &found.biclusters {
            let report = correlation_report_with(&tensor, &b.rows, &b.cols, similarity)?;
            println!("bicluster {}: {}", b.rank_position, report.summary_line());
            if let Some(dir) = &a.corr_dir {
                let file = dir.join(format!("bicluster_{}.csv", b.rank_position));
                write_atomic(&file, report.to_csv().as_bytes())?;
            }
        }
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let base = synth_spec(&a.synth, synthetic::sweep_sigmas(1.0, a.synth.q));
    base.validate()?;
    let points = synthetic::sweep_sigma(&base, &a.sigma1_grid, a.reps, a.method)?;
    write_atomic(&a.out, synthetic::sweep_to_csv(&points).as_bytes())?;
    for p in &points {
        println!("sigma1={} mean_recovery={}", p.sigma1, p.mean_recovery);
    }
    Ok(())
}

fn spectrum(a: SpectrumArgs) -> Result<()> {
    if a.top == 0 {
        return Err(Error::Argument("--top must be at least 1".into()));
    }
    let tensor = read_tensor(&a.input)?;
    let (c1, c2) = fold_covariances(&tensor);
    let mut csv = String::from("matrix,rank,eigenvalue\n");
    let mut ranks = Vec::new();
    for (name, c) in [("C1", &c1), ("C2", &c2)] {
        let pairs = spectral::eigen_sym(c)?;
        for (i, v) in pairs.values().iter().take(a.top).enumerate() {
            csv.push_str(&format!("{name},{},{v:?}\n", i + 1));
        }
        let est = spectral::estimate_rank(pairs.values(), a.gap.max_rank, a.gap.theta);
        if !est.gap_found {
            eprintln!("warning: no eigenvalue gap above {} in {name}", a.gap.theta);
        }
        ranks.push(est.rank);
    }
    write_atomic(&a.out, csv.as_bytes())?;
    println!("rank_c1={} rank_c2={} r={}", ranks[0], ranks[1], ranks[0].min(ranks[1]));
    Ok(())
}

fn ingest(a: IngestArgs) -> Result<()> {
    let out = ingest_long_csv(fs::File::open(&a.input)?, a.fill)?;
    write_atomic(&a.out, tns::to_string(&out.tensor).as_bytes())?;
    let (n1, n2, m) = out.tensor.shape();
    println!("n1={n1} n2={n2} m={m} filled={} duplicates={}", out.filled, out.duplicates);
    Ok(())
}
