use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn tbic(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbic"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn tbic")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "stdout: {}\nstderr: {}", stdout(&o), stderr(&o));
    o
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.split_whitespace()
        .find_map(|w| w.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("{key} missing in {text}"))
}

#[test]
fn ingest_full_grid() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("date,station,channel,value\n");
    for (i, d) in ["d1", "d2"].iter().enumerate() {
        for (j, s) in ["s1", "s2"].iter().enumerate() {
            for (c, ch) in ["a", "b"].iter().enumerate() {
                writeln!(csv, "{d},{s},{ch},{}", i * 4 + j * 2 + c).unwrap();
            }
        }
    }
    fs::write(dir.path().join("in.csv"), csv).unwrap();
    let o = ok(tbic(&["ingest", "--input", "in.csv", "--out", "t.tns"], dir.path()));
    assert!(stdout(&o).contains("n1=2 n2=2 m=2 filled=0 duplicates=0"));
    let text = fs::read_to_string(dir.path().join("t.tns")).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "tns3 2 2 2");
    assert_eq!(lines[4], "6.0 7.0");
}

#[test]
fn ingest_averages_duplicates_and_honours_fill_policy() {
    let dir = TempDir::new().unwrap();
    let csv = "date,station,channel,value\nd1,s1,a,2\nd1,s1,a,4\nd2,s2,a,1\n";
    fs::write(dir.path().join("in.csv"), csv).unwrap();
    let o = ok(tbic(&["ingest", "--input", "in.csv", "--out", "t.tns"], dir.path()));
    assert!(stdout(&o).contains("filled=2 duplicates=1"), "{}", stdout(&o));
    let text = fs::read_to_string(dir.path().join("t.tns")).unwrap();
    assert_eq!(text.lines().nth(1), Some("3.0"));

    let o = tbic(&["ingest", "--input", "in.csv", "--out", "u.tns", "--fill", "error"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("d1"));
    assert!(!dir.path().join("u.tns").exists());
}

#[test]
fn ingest_electricity_shape_then_recursive_solve() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("day,client,quarter,kwh\n");
    for d in 0..365 {
        for c in 0..161 {
            for q in 0..4 {
                let base = if d < 60 && c < 30 { 50.0 } else { 1.0 };
                let v = base + ((d * 7 + c * 13 + q * 3) % 11) as f64 * 0.1;
                writeln!(csv, "{d},{c},{q},{v}").unwrap();
            }
        }
    }
    fs::write(dir.path().join("elec.csv"), csv).unwrap();
    let o = ok(tbic(&["ingest", "--input", "elec.csv", "--out", "e.tns"], dir.path()));
    assert!(stdout(&o).contains("n1=365 n2=161 m=4"));

    ok(tbic(
        &["solve", "--input", "e.tns", "--method", "recursive", "--k", "50:25,50:25", "--out", "r.json"],
        dir.path(),
    ));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let bs = json["biclusters"].as_array().unwrap();
    assert_eq!(bs.len(), 2);
    for b in bs {
        assert_eq!(b["rows"].as_array().unwrap().len(), 50);
        assert_eq!(b["cols"].as_array().unwrap().len(), 25);
    }
}

#[test]
fn spectrum_of_zero_tensor_warns() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("tns3 4 3 2\n");
    for _ in 0..12 {
        text.push_str("0.0 0.0\n");
    }
    fs::write(dir.path().join("z.tns"), text).unwrap();
    let o = ok(tbic(&["spectrum", "--input", "z.tns", "--out", "s.csv"], dir.path()));
    assert!(stdout(&o).contains("r=1"));
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn spectrum_full_listing_sums_to_energy() {
    let dir = TempDir::new().unwrap();
    ok(tbic(
        &[
            "generate", "--n1", "12", "--n2", "9", "--m", "3", "--q", "1", "--k", "3",
            "--sigma", "8", "--noise", "I", "--seed", "4", "--tensor", "t.tns", "--truth", "g.json",
        ],
        dir.path(),
    ));
    ok(tbic(&["spectrum", "--input", "t.tns", "--top", "12", "--out", "s.csv"], dir.path()));
    let t = fs::read_to_string(dir.path().join("t.tns")).unwrap();
    let energy: f64 = t
        .lines()
        .skip(1)
        .flat_map(|l| l.split_whitespace().map(|v| v.parse::<f64>().unwrap()))
        .map(|v| v * v)
        .sum();
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut sums = [0.0; 2];
    for line in csv.lines().skip(1) {
        let parts: Vec<_> = line.split(',').collect();
        let idx = if parts[0] == "C1" { 0 } else { 1 };
        sums[idx] += parts[2].parse::<f64>().unwrap();
    }
    assert_eq!(csv.lines().filter(|l| l.starts_with("C1")).count(), 12);
    assert_eq!(csv.lines().filter(|l| l.starts_with("C2")).count(), 9);
    for s in sums {
        assert!((s - energy).abs() <= 1e-6 * energy, "{s} vs {energy}");
    }
}

#[test]
fn generate_scalar_case() {
    let dir = TempDir::new().unwrap();
    let o = ok(tbic(
        &[
            "generate", "--n1", "1", "--n2", "1", "--m", "1", "--k", "1", "--sigma", "1",
            "--noise", "none", "--tensor", "t.tns", "--truth", "g.json",
        ],
        dir.path(),
    ));
    assert_eq!(field(&stdout(&o), "sigma_z"), "0");
    assert_eq!(fs::read_to_string(dir.path().join("t.tns")).unwrap(), "tns3 1 1 1\n1.0\n");
}

#[test]
fn solve_single_recovers_noiseless_block_and_eval_scores_it() {
    let dir = TempDir::new().unwrap();
    ok(tbic(
        &[
            "generate", "--n1", "10", "--n2", "8", "--m", "4", "--k", "3", "--sigma", "5",
            "--noise", "none", "--time-profile", "random", "--seed", "9",
            "--tensor", "t.tns", "--truth", "g.json",
        ],
        dir.path(),
    ));
    ok(tbic(&["solve", "--input", "t.tns", "--k", "3", "--out", "r.json"], dir.path()));
    let res: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(res["biclusters"][0]["rows"], truth["row_sets"][0]);
    assert_eq!(res["biclusters"][0]["cols"], truth["col_sets"][0]);

    let o = ok(tbic(
        &[
            "eval", "--result", "r.json", "--truth", "g.json", "--tensor", "t.tns",
            "--corr-dir", "corr",
        ],
        dir.path(),
    ));
    assert_eq!(field(&stdout(&o), "recovery"), "1.0");
    let corr = fs::read_to_string(dir.path().join("corr/bicluster_1.csv")).unwrap();
    assert_eq!(corr.lines().count(), 3 * 3 + 1);
}

#[test]
fn sweep_writes_one_row_per_grid_point() {
    let dir = TempDir::new().unwrap();
    ok(tbic(
        &[
            "sweep", "--n1", "20", "--n2", "20", "--m", "4", "--q", "2", "--k", "4",
            "--sigma1-grid", "0,30,60", "--reps", "2", "--out", "s.csv",
        ],
        dir.path(),
    ));
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "sigma1,mean_recovery,std_recovery,reps");
    assert_eq!(lines.len(), 4);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    // bad argument: sizes do not fit
    fs::write(dir.path().join("t.tns"), "tns3 2 2 1\n1.0\n2.0\n3.0\n4.0\n").unwrap();
    let o = tbic(&["solve", "--input", "t.tns", "--k", "5", "--out", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    // unknown flag
    assert_eq!(tbic(&["solve", "--bogus"], dir.path()).status.code(), Some(2));
    // missing file
    let o = tbic(&["solve", "--input", "nope.tns", "--k", "1", "--out", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    // malformed tensor reports its line
    fs::write(dir.path().join("bad.tns"), "tns3 2 1 1\n1.0\nabc\n").unwrap();
    let o = tbic(&["solve", "--input", "bad.tns", "--k", "1", "--out", "r.json"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}
