//! End-to-end tests against the built binary.

use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homramsey"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn fake_solver(dir: &Path, name: &str, script: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, script).unwrap();
    let mut perms = fs::metadata(&path).unwrap().permissions();
    perms.set_mode(0o755);
    fs::set_permissions(&path, perms).unwrap();
    path
}

#[test]
fn count_hom_8_4() {
    let out = run(&["count", "--n", "8", "--k", "4", "--hom"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "105");
}

#[test]
fn count_all_is_stirling() {
    let out = run(&["count", "--n", "4", "--k", "2"]);
    assert_eq!(stdout(&out).trim(), "7");
}

#[test]
fn enum_hom_4_2_lists_three() {
    let out = run(&["enum", "--n", "4", "--k", "2", "--hom"]);
    assert_eq!(stdout(&out), "1,1,2,2\n1,2,1,2\n1,2,2,1\n");
}

#[test]
fn enum_respects_limit() {
    let out = run(&["enum", "--n", "8", "--k", "2", "--hom", "--limit", "2"]);
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn coarsen_discrete_partition() {
    let out = run(&["coarsen", "--u", "1,2,3,4", "--k", "2"]);
    assert_eq!(stdout(&out), "1,1,2,2\n1,2,1,2\n1,2,2,1\n");
}

#[test]
fn machinery_i0_output_format() {
    let out = run(&["machinery", "i0", "--k", "2", "--m", "4"]);
    assert_eq!(stdout(&out).trim(), "i0=6 n=8");
    let out = run(&["machinery", "i0", "--k", "3", "--m", "6"]);
    assert_eq!(stdout(&out).trim(), "i0=7 n=12");
}

#[test]
fn machinery_s_prints_json() {
    let out = run(&["machinery", "s", "--x", "1,1,2,1,2", "--k", "2", "--i", "3"]);
    assert_eq!(stdout(&out).trim(), "[[1,2,4],[3,5]]");
}

#[test]
fn machinery_bij_roundtrip() {
    let out = run(&["machinery", "bij", "--a", "[[1],[2]]", "--t", "1,2,1,2"]);
    assert_eq!(stdout(&out), "b=[[1,3,5],[2,4,6]]\nt=1,2,1,2\n");
}

#[test]
fn encode_without_symmetry_break_is_exact() {
    let out = run(&[
        "encode",
        "--n",
        "4",
        "--k",
        "2",
        "--m",
        "4",
        "--colors",
        "2",
        "--hom",
        "--no-symbreak",
    ]);
    let text = stdout(&out);
    assert!(text.contains("p cnf 3 2"));
    assert!(text.contains("1 2 3 0"));
    assert!(text.contains("-1 -2 -3 0"));
    assert!(text.contains("c vertex 0 = 1,1,2,2 var 1"));
}

#[test]
fn encoded_file_solves_like_the_search() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("inst.cnf");
    let out = run(&[
        "encode",
        "--n",
        "4",
        "--k",
        "2",
        "--m",
        "4",
        "--colors",
        "2",
        "--hom",
        "--dimacs",
        cnf.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&cnf).unwrap();
    let formula = homramsey_core::sat::parse_dimacs(&text).unwrap();
    match homramsey_core::sat::solve(&formula, &Default::default()) {
        homramsey_core::sat::SolveOutcome::Sat(model) => {
            assert!(formula.evaluate(&model));
        }
        other => panic!("expected sat, got {other:?}"),
    }
}

#[test]
fn edges_json_shape() {
    let out = run(&["edges", "--n", "4", "--k", "2", "--m", "4", "--hom"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["mode"], "hom");
    assert_eq!(v["vertices"].as_array().unwrap().len(), 3);
    assert_eq!(v["edges"], serde_json::json!([[0, 1, 2]]));
    assert_eq!(v["edge_sources"], 1);
}

#[test]
fn search_emits_witness_and_jsonl_record() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("runs.jsonl");
    let args = [
        "search",
        "--k",
        "1",
        "--m",
        "2",
        "--colors",
        "2",
        "--max-n",
        "6",
        "--out",
        results.to_str().unwrap(),
    ];
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("witness: n=4"));

    // re-running appends instead of overwriting
    let out = run(&args);
    assert!(out.status.success());
    let text = fs::read_to_string(&results).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["command"], "search");
        assert_eq!(v["report"]["witness_n"], 4);
    }
}

#[test]
fn search_warns_on_malformed_results_file_but_appends() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("runs.jsonl");
    fs::write(&results, "this is not json\n").unwrap();
    let out = run(&[
        "search",
        "--k",
        "1",
        "--m",
        "2",
        "--colors",
        "2",
        "--max-n",
        "4",
        "--out",
        results.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("unparseable"));
    let text = fs::read_to_string(&results).unwrap();
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn search_out_dash_streams_to_stdout() {
    let out = run(&[
        "search", "--k", "1", "--m", "2", "--colors", "2", "--max-n", "4", "--out", "-",
    ]);
    let text = stdout(&out);
    let json_line = text
        .lines()
        .find(|l| l.starts_with('{'))
        .expect("a JSON line on stdout");
    let v: serde_json::Value = serde_json::from_str(json_line).unwrap();
    assert_eq!(v["report"]["witness_n"], 4);
}

#[test]
fn verify_accepts_the_searchs_coloring() {
    let dir = tempfile::tempdir().unwrap();
    let coloring = dir.path().join("coloring.json");
    fs::write(&coloring, "[1,1,2]").unwrap();
    let out = run(&[
        "verify",
        "--n",
        "4",
        "--k",
        "2",
        "--m",
        "4",
        "--colors",
        "2",
        "--coloring",
        coloring.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "OK: no monochromatic (u)^k_hom");

    // comma-separated parses too
    fs::write(&coloring, "1,1,1").unwrap();
    let out = run(&[
        "verify",
        "--n",
        "4",
        "--k",
        "2",
        "--m",
        "4",
        "--colors",
        "2",
        "--coloring",
        coloring.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("Violation: u rank 0 is monochromatic in color 1"));
}

#[test]
fn domain_errors_exit_one() {
    let out = run(&["count", "--n", "5", "--k", "2", "--hom"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("does not divide"));
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["count", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["no-such-subcommand"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn external_engine_uses_env_solver() {
    let dir = tempfile::tempdir().unwrap();
    // a "solver" that answers the n=4 instance correctly: vertices 0,1 get
    // color 1, vertex 2 gets color 2
    let solver = fake_solver(
        dir.path(),
        "fixed.sh",
        "#!/bin/sh\nprintf 's SATISFIABLE\\nv 1 2 -3 0\\n'\nexit 10\n",
    );
    let out = bin()
        .args([
            "search",
            "--k",
            "2",
            "--m",
            "4",
            "--colors",
            "2",
            "--max-n",
            "4",
            "--include-m",
            "--engine",
            "sat-external",
        ])
        .env("HOMRAMSEY_SOLVER", &solver)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("bad coloring found (verified)"));
}

#[test]
fn external_engine_requires_env() {
    let out = bin()
        .args([
            "search",
            "--k",
            "2",
            "--m",
            "4",
            "--colors",
            "2",
            "--max-n",
            "4",
            "--engine",
            "sat-external",
        ])
        .env_remove("HOMRAMSEY_SOLVER")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("HOMRAMSEY_SOLVER"));
}

#[test]
fn external_unsat_is_confirmed_internally_by_default() {
    let dir = tempfile::tempdir().unwrap();
    // lying solver: claims UNSAT on an instance that has bad colorings; the
    // internal confirmation overrides it
    let solver = fake_solver(
        dir.path(),
        "liar.sh",
        "#!/bin/sh\necho 's UNSATISFIABLE'\nexit 20\n",
    );
    let out = bin()
        .args([
            "search",
            "--k",
            "2",
            "--m",
            "4",
            "--colors",
            "2",
            "--max-n",
            "4",
            "--include-m",
            "--engine",
            "sat-external",
        ])
        .env("HOMRAMSEY_SOLVER", &solver)
        .output()
        .unwrap();
    assert!(stdout(&out).contains("bad coloring found (verified)"));

    // with --trust-external the claim is recorded as a (false) witness
    let out = bin()
        .args([
            "search",
            "--k",
            "2",
            "--m",
            "4",
            "--colors",
            "2",
            "--max-n",
            "4",
            "--include-m",
            "--engine",
            "sat-external",
            "--trust-external",
        ])
        .env("HOMRAMSEY_SOLVER", &solver)
        .output()
        .unwrap();
    assert!(stdout(&out).contains("no bad coloring (sat-external)"));
}

#[test]
fn broken_external_solver_is_a_resource_limit() {
    let dir = tempfile::tempdir().unwrap();
    let solver = fake_solver(dir.path(), "broken.sh", "#!/bin/sh\nexit 3\n");
    let out = bin()
        .args([
            "search",
            "--k",
            "2",
            "--m",
            "4",
            "--colors",
            "2",
            "--max-n",
            "4",
            "--include-m",
            "--engine",
            "sat-external",
        ])
        .env("HOMRAMSEY_SOLVER", &solver)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("resource limit (external-solver-failure"));
}
