use std::fs;
use std::path::Path;
use std::process::Command;

use archerfish_cli::config::ExperimentConfig;
use archerfish_cli::fixtures::VerdictRow;
use archerfish_cli::store::{
    from_csv_bytes, summary_rows, to_csv_bytes, ResultRow, SummaryRow, TraceRow,
};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_archerfish"))
}

fn small_run(out: &Path, extra: &[&str]) -> std::process::Output {
    bin()
        .args([
            "run",
            "--problem",
            "sphere",
            "--problem",
            "RC21",
            "--dim",
            "3",
        ])
        .args(["--reps", "3", "--budget", "1500", "--population", "12"])
        .args([
            "--theta", "pi/12", "--theta", "pi/4", "--seed", "5", "--out",
        ])
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn run_writes_results_summary_and_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let out = small_run(tmp.path(), &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let results = fs::read_to_string(tmp.path().join("results.csv")).unwrap();
    assert!(results.starts_with("problem,dim,theta,omega,seed,fes,best_error,feasible,mv\n"));
    assert_eq!(results.lines().count(), 1 + 2 * 2 * 3);
    let traces = fs::read_dir(tmp.path().join("convergence"))
        .unwrap()
        .count();
    assert_eq!(traces, 12);
    let trace = fs::read(tmp.path().join("convergence/RC21_d5_c1_r2.csv")).unwrap();
    let rows: Vec<TraceRow> = from_csv_bytes(&trace).unwrap();
    assert!(rows.windows(2).all(|w| w[0].fe < w[1].fe));
}

#[test]
fn summary_recomputes_bit_for_bit() {
    let tmp = tempfile::tempdir().unwrap();
    small_run(tmp.path(), &["--no-traces"]);
    let rows: Vec<ResultRow> =
        from_csv_bytes(&fs::read(tmp.path().join("results.csv")).unwrap()).unwrap();
    let stored = fs::read(tmp.path().join("summary.csv")).unwrap();
    assert_eq!(to_csv_bytes(&summary_rows(&rows)).unwrap(), stored);
    let parsed: Vec<SummaryRow> = from_csv_bytes(&stored).unwrap();
    assert_eq!(parsed, summary_rows(&rows));
    assert!(!tmp.path().join("convergence").exists());
}

#[test]
fn csv_round_trips_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    small_run(tmp.path(), &[]);
    let results = fs::read(tmp.path().join("results.csv")).unwrap();
    let rows: Vec<ResultRow> = from_csv_bytes(&results).unwrap();
    assert_eq!(to_csv_bytes(&rows).unwrap(), results);
    let summary = fs::read(tmp.path().join("summary.csv")).unwrap();
    let rows: Vec<SummaryRow> = from_csv_bytes(&summary).unwrap();
    assert_eq!(to_csv_bytes(&rows).unwrap(), summary);
    let trace = fs::read(tmp.path().join("convergence/sphere_d3_c0_r0.csv")).unwrap();
    let rows: Vec<TraceRow> = from_csv_bytes(&trace).unwrap();
    assert_eq!(to_csv_bytes(&rows).unwrap(), trace);

    let odd = vec![ResultRow {
        problem: "a,b".into(),
        dim: 1,
        theta: 1e-300,
        omega: 0.1 + 0.2,
        seed: u64::MAX,
        fes: 0,
        best_error: -0.0,
        feasible: false,
        mv: f64::INFINITY,
    }];
    let bytes = to_csv_bytes(&odd).unwrap();
    let back: Vec<ResultRow> = from_csv_bytes(&bytes).unwrap();
    assert_eq!(to_csv_bytes(&back).unwrap(), bytes);
}

#[test]
fn same_seed_same_bytes_through_the_binary() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    small_run(a.path(), &["--threads", "1"]);
    small_run(b.path(), &["--threads", "3"]);
    for f in [
        "results.csv",
        "summary.csv",
        "convergence/sphere_d3_c1_r1.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn config_file_and_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.toml");
    let out = tmp.path().join("out");
    fs::write(
        &cfg,
        format!(
            "seed = 3\nout = {:?}\n[problems]\nnames = [\"griewank\"]\ndims = [2]\n\
             [run]\nreps = 2\nbudget = 800\npopulation = 10\n[grid]\ntheta = [\"pi/6\"]\nomega = [0.05]\n",
            out.display().to_string()
        ),
    )
    .unwrap();
    let st = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--reps", "4"])
        .output()
        .unwrap();
    assert_eq!(
        st.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let rows: Vec<ResultRow> = from_csv_bytes(&fs::read(out.join("results.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .all(|r| r.problem == "griewank" && r.fes == 800 && r.omega == 0.05));

    let parsed = ExperimentConfig::from_toml_file(&cfg).unwrap();
    assert_eq!(parsed.reps, Some(2));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["--version"]), Some(0));
    assert_eq!(code(&["list"]), Some(0));
    assert_eq!(code(&["replay", "table3", "table27"]), Some(0));
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["run", "--problem", "nope"]), Some(1));
    assert_eq!(code(&["run", "--theta", "2.0"]), Some(1));
    assert_eq!(code(&["run", "--paper-budgets", "--dim", "7"]), Some(1));
    assert_eq!(code(&["run", "--config", "/nonexistent.toml"]), Some(1));
    assert_eq!(code(&["replay", "table99"]), Some(1));
    assert_eq!(code(&["stats", "--fixture", "table2"]), Some(1));
    let out = tmp.path().to_str().unwrap();
    assert_eq!(
        code(&["run", "--dim", "2", "--reps", "2", "--budget", "5", "--out", out]),
        Some(2)
    );
    let failures = fs::read_to_string(tmp.path().join("failures.csv")).unwrap();
    assert_eq!(failures.lines().count(), 3);
}

#[test]
fn stats_over_a_store_writes_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let st = bin()
        .args([
            "run",
            "--problem",
            "sphere",
            "--problem",
            "rastrigin",
            "--problem",
            "ackley",
        ])
        .args([
            "--problem",
            "griewank",
            "--problem",
            "rosenbrock",
            "--problem",
            "bent-cigar",
        ])
        .args([
            "--problem",
            "schwefel",
            "--dim",
            "2",
            "--reps",
            "2",
            "--budget",
            "600",
        ])
        .args([
            "--population",
            "10",
            "--theta",
            "pi/12",
            "--theta",
            "5pi/12",
            "--no-traces",
        ])
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    let st = bin()
        .args(["stats", "--results"])
        .arg(tmp.path().join("results.csv"))
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(
        st.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let text = String::from_utf8(st.stdout).unwrap();
    assert!(text.starts_with("Friedman: F_r = "));
    let verdicts = fs::read(tmp.path().join("verdicts.csv")).unwrap();
    assert!(verdicts.starts_with(b"comparison,k,w_plus,w_minus,w_min,critical,verdict\n"));
    let rows: Vec<VerdictRow> = from_csv_bytes(&verdicts).unwrap();
    assert!(rows.len() <= 1);
}

#[test]
fn replay_prints_alignment() {
    let out = bin().args(["replay", "table24"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("12/12 rows match"));
    assert!(text.contains("IMODE outperforms AHO"));
    let out = bin()
        .args(["stats", "--fixture", "table6"])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("(5pi/12, 0.01)"));
}
