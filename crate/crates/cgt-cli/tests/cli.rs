//! End-to-end checks of the `cgt` binary: exit codes, printed values, file
//! round-trips, and byte determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cgt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cgt")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn construct_crs_prints_plan_and_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("m.cgt");
    let out = run(&[
        "construct", "--method", "crs", "--n", "100", "--d", "2",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("n = 100 d = 2 : 2 3 5 7 11 13 total tests: 41"), "{text}");
    assert!(text.contains("t=41 n=100 d=2 sampling_rate=6"), "{text}");
    assert!(out_path.exists());
}

#[test]
fn construct_crs_backtrack_saves_tests() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("m.cgt");
    let out = run(&[
        "construct", "--method", "crs", "--n", "100", "--d", "2", "--backtrack",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("2^2 3^2 5 7 11 total tests: 36"), "{text}");
    let file = std::fs::read_to_string(&out_path).unwrap();
    assert!(file.contains("params=primepowers=2^2,3^2,5,7,11"), "{file}");
}

#[test]
fn construct_d2_uses_minimal_q() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("d2.cgt");
    let out = run(&[
        "construct", "--method", "d2", "--n", "100",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("t=25 n=100 d=2"));
    let file = std::fs::read_to_string(&out_path).unwrap();
    assert!(file.contains("params=q=5;effn=100"));
}

#[test]
fn construct_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.cgt");
    let b = dir.path().join("b.cgt");
    for path in [&a, &b] {
        let out = run(&[
            "construct", "--method", "rw", "--n", "64", "--d", "2", "--seed", "7",
            "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn simulate_decodes_and_writes_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("n6.cgt");
    let outcomes = dir.path().join("o.txt");
    run(&[
        "construct", "--method", "crs", "--n", "6", "--d", "1",
        "--out", matrix.to_str().unwrap(),
    ]);
    let out = run(&[
        "simulate", "--matrix", matrix.to_str().unwrap(),
        "--defectives", "4", "--out", outcomes.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("outcomes 10010"), "{text}");
    assert!(text.contains("identified {4}"), "{text}");
    assert_eq!(std::fs::read_to_string(&outcomes).unwrap(), "10010\n");

    // empty defective list on a digit scheme: all-zero outcomes, empty set
    let d2 = dir.path().join("d2.cgt");
    run(&["construct", "--method", "d2", "--n", "100", "--out", d2.to_str().unwrap()]);
    let out = run(&[
        "simulate", "--matrix", d2.to_str().unwrap(), "--defectives", "",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains(&format!("outcomes {}", "0".repeat(25))), "{text}");
    assert!(text.contains("identified {}"), "{text}");
}

#[test]
fn simulate_random_trials_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("d3.cgt");
    run(&[
        "construct", "--method", "d3", "--n", "16",
        "--out", matrix.to_str().unwrap(),
    ]);
    let out = run(&[
        "simulate", "--matrix", matrix.to_str().unwrap(),
        "--random", "3", "--seed", "7", "--trials", "25",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(stdout(&out).matches("match: yes").count(), 25);
}

#[test]
fn decode_reports_overflow_with_survivors() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("n6.cgt");
    let outcomes = dir.path().join("o.txt");
    run(&[
        "construct", "--method", "crs", "--n", "6", "--d", "1",
        "--out", matrix.to_str().unwrap(),
    ]);
    // defectives {1,4} overflow a d=1 decode
    let out = run(&[
        "simulate", "--matrix", matrix.to_str().unwrap(),
        "--defectives", "1,4", "--out", outcomes.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let out = run(&[
        "decode", "--matrix", matrix.to_str().unwrap(),
        "--outcomes", outcomes.to_str().unwrap(), "--dump-survivors",
    ]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("overflow: 2 survivors"), "{text}");
    assert!(text.contains("survivors {1,4}"), "{text}");
}

#[test]
fn verify_pass_fail_and_guard() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("n16.cgt");
    run(&[
        "construct", "--method", "crs", "--n", "16", "--d", "2",
        "--out", good.to_str().unwrap(),
    ]);
    let out = run(&["verify", "--matrix", good.to_str().unwrap(), "--disjunct", "2"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("PASS 2-disjunct"));

    // one all-ones row distinguishes nothing
    let bad = dir.path().join("ones.cgt");
    std::fs::write(&bad, "CGT1\nmethod=custom\nn=3 t=1 d=1\nparams=\n0 1 2\n").unwrap();
    let out = run(&["verify", "--matrix", bad.to_str().unwrap(), "--disjunct", "1"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("FAIL 1-disjunct"), "{text}");
    assert!(text.contains("columns {0} cover column 1"), "{text}");

    let out = run(&["verify", "--matrix", bad.to_str().unwrap(), "--resolvable", "1", "3"]);
    assert_eq!(code(&out), 0);

    let d2 = dir.path().join("d2q2.cgt");
    run(&["construct", "--method", "d2", "--n", "9", "--out", d2.to_str().unwrap()]);
    let out = run(&["verify", "--matrix", d2.to_str().unwrap(), "--separable", "2"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("PASS 2-separable"));

    let rw = dir.path().join("rw32.cgt");
    run(&[
        "construct", "--method", "rw", "--n", "32", "--d", "2", "--k", "2",
        "--seed", "1", "--out", rw.to_str().unwrap(),
    ]);
    let out = run(&["verify", "--matrix", rw.to_str().unwrap(), "--resolvable", "2", "2"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("PASS (2,2)-resolvable"));

    // guard: n=100 exceeds the brute-force limit without --force
    let big = dir.path().join("n100.cgt");
    run(&[
        "construct", "--method", "crs", "--n", "100", "--d", "2",
        "--out", big.to_str().unwrap(),
    ]);
    let out = run(&["verify", "--matrix", big.to_str().unwrap(), "--disjunct", "2"]);
    assert_eq!(code(&out), 2);
    let out = run(&[
        "verify", "--matrix", big.to_str().unwrap(), "--disjunct", "2", "--force",
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn compare_against_fixtures() {
    let table1_ns = "100,1e4,1e6,1e8,1e10,1e20,1e30";
    let cases: [(&str, &str, &str, &str, usize); 5] = [
        ("2", "15,100,1e3,1e4,1e5,1e6,1e8,1e10,1e20,1e30",
         "d2,crs-bt,crs,mr,ks,hs", "table2_d2.csv", 59),
        ("5", table1_ns, "crs-bt,crs,hs", "table1_d5.csv", 21),
        ("10", table1_ns, "crs-bt,crs,hs", "table1_d10.csv", 21),
        ("2", "3^63,3^64", "d2,ks", "table3_d2_spot.csv", 4),
        ("3", table1_ns, "crs-bt,crs,d3,hs,dh3", "table4_d3.csv", 35),
    ];
    for (d, ns, methods, file, cells) in cases {
        let fixture = fixtures().join(file);
        let out = run(&[
            "compare", "--d", d, "--n", ns, "--methods", methods,
            "--fixture", fixture.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{file}: {}", stdout(&out));
        assert!(
            stdout(&out).contains(&format!("fixture: {cells} cells match")),
            "{file}: {}",
            stdout(&out)
        );
    }

    // a wrong expectation must be reported and fail the run
    let dir = tempfile::tempdir().unwrap();
    let tampered = dir.path().join("bad.csv");
    std::fs::write(&tampered, "n,d2\n15,13\n").unwrap();
    let out = run(&[
        "compare", "--d", "2", "--n", "15", "--methods", "d2",
        "--fixture", tampered.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("fixture mismatch: n=15 d2: expected 13, computed 12"));
}

#[test]
fn compare_csv_format() {
    let out = run(&[
        "compare", "--d", "3", "--n", "1000000", "--methods", "dh3,hs",
        "--format", "csv",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "n,dh3,hs\n1000000,7080,2046\n");
}

#[test]
fn two_stage_identifies_and_is_deterministic() {
    let args = [
        "two-stage", "--n", "256", "--d", "4", "--k", "4", "--seed", "1",
        "--random-hidden", "4",
    ];
    let first = run(&args);
    assert_eq!(code(&first), 0, "{}", stdout(&first));
    let text = stdout(&first);
    assert!(text.contains("stage1_tests=136"), "{text}");
    assert!(text.contains("match: yes"), "{text}");
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);

    let empty = run(&["two-stage", "--n", "64", "--d", "2", "--seed", "3", "--hidden", ""]);
    assert_eq!(code(&empty), 0);
    let text = stdout(&empty);
    assert!(text.contains("candidates=0 stage2_tests=0 final={}"), "{text}");
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["construct", "--method", "crs", "--n", "100"]); // missing --d
    assert_eq!(code(&out), 2);
    let out = run(&["two-stage", "--n", "10", "--d", "10", "--seed", "1"]);
    assert_eq!(code(&out), 2);
    let out = run(&["compare", "--d", "3", "--n", "100", "--methods", "mr"]);
    assert_eq!(code(&out), 2);
    let out = run(&["nonsense"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn cli_files_reload_cleanly() {
    // parse . serialize = identity, via a second decode over a reloaded file
    let dir = tempfile::tempdir().unwrap();
    let m1 = dir.path().join("a.cgt");
    run(&[
        "construct", "--method", "rw", "--n", "32", "--d", "2", "--seed", "5",
        "--out", m1.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&m1).unwrap();
    let reparsed = cgt_core::fileio::parse_matrix(&text).unwrap();
    assert_eq!(cgt_core::fileio::serialize_matrix(&reparsed), text);
}
