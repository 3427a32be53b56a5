//! End-to-end tests of the binary: exit codes, JSON output shape, and
//! reproducibility, driven through real files in a temp directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn mdfa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdfa"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

/// Generates a fixture through the binary itself and returns its path.
fn generated(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let out_flag = path.to_str().unwrap().to_string();
    full.push("--out");
    full.push(&out_flag);
    let out = mdfa(dir, &full);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn write_alloc(dir: &Path, name: &str, bundles: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, format!("{{\"bundles\":{bundles}}}")).unwrap();
    path
}

#[test]
fn verify_splits_exit_codes_by_notion() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), "gap.json", &["generate", "no-strong-sef1"]);
    let alloc = write_alloc(dir.path(), "alloc.json", "[[0],[1,2]]");
    let inst = inst.to_str().unwrap();
    let alloc = alloc.to_str().unwrap();

    let strong = mdfa(dir.path(), &["verify", inst, alloc, "--notion", "strong", "--c", "1"]);
    assert_eq!(code(&strong), 1);
    let body = stdout_json(&strong);
    assert_eq!(body["answer"], Value::Bool(false));
    assert!(body["violations"]["strong"].is_array());

    let weak = mdfa(dir.path(), &["verify", inst, alloc, "--notion", "weak", "--c", "1"]);
    assert_eq!(code(&weak), 0);
    let body = stdout_json(&weak);
    assert_eq!(body["answer"], Value::Bool(true));
    assert!(body["witness"]["weak"].is_array());
}

#[test]
fn empty_instances_satisfy_everything() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("empty.json");
    fs::write(&inst, "{\"agents\":2,\"dimensions\":1,\"identical\":true,\"valuations\":[]}")
        .unwrap();
    let alloc = write_alloc(dir.path(), "empty_alloc.json", "[[],[]]");
    for notion in ["weak", "strong"] {
        let out = mdfa(
            dir.path(),
            &[
                "verify",
                inst.to_str().unwrap(),
                alloc.to_str().unwrap(),
                "--notion",
                notion,
                "--c",
                "0",
            ],
        );
        assert_eq!(code(&out), 0, "{notion}");
    }
}

#[test]
fn exists_agrees_across_engines() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), "hard.json", &["generate", "no-weak-sef1"]);
    let inst = inst.to_str().unwrap();

    let dp = mdfa(dir.path(), &["exists", inst, "--notion", "weak", "--c", "1"]);
    assert_eq!(code(&dp), 1);
    assert_eq!(stdout_json(&dp)["answer"], Value::Bool(false));

    let oracle = mdfa(
        dir.path(),
        &["exists", inst, "--notion", "weak", "--c", "1", "--engine", "oracle"],
    );
    assert_eq!(code(&oracle), 1);
    let body = stdout_json(&oracle);
    assert_eq!(body["answer"], Value::Bool(false));
    assert_eq!(body["counters"]["scanned_allocations"], Value::from(8));

    let loose = mdfa(dir.path(), &["exists", inst, "--notion", "weak", "--c", "2"]);
    assert_eq!(code(&loose), 0);
    assert!(stdout_json(&loose)["allocation"].is_array());
}

#[test]
fn diagonal_instances_pass_at_the_next_budget() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), "diag.json", &["generate", "diagonal", "--c", "1"]);
    let inst = inst.to_str().unwrap();
    let tight = mdfa(dir.path(), &["exists", inst, "--notion", "strong", "--c", "1"]);
    assert_eq!(code(&tight), 1);
    let loose = mdfa(dir.path(), &["exists", inst, "--notion", "strong", "--c", "2"]);
    assert_eq!(code(&loose), 0);
}

#[test]
fn allocate_reports_its_guarantee_and_checks_preconditions() {
    let dir = tempfile::tempdir().unwrap();
    let two_dim = generated(dir.path(), "gap.json", &["generate", "no-strong-sef1"]);
    let out = mdfa(dir.path(), &["allocate", two_dim.to_str().unwrap(), "--method", "two-agent"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let body = stdout_json(&out);
    assert_eq!(body["guarantee_c"], Value::from(3));
    assert!(body["witness"]["strong"].is_array());
    assert!(body["trace"]["shares"].is_array());

    let three_dim = generated(dir.path(), "hard.json", &["generate", "no-weak-sef1"]);
    let out = mdfa(
        dir.path(),
        &["allocate", three_dim.to_str().unwrap(), "--method", "two-agent-identical"],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["guarantee_c"], Value::from(3));

    let skew = dir.path().join("skew.json");
    fs::write(
        &skew,
        "{\"agents\":2,\"dimensions\":1,\"valuations\":[[[1],[2]],[[2],[1]]]}",
    )
    .unwrap();
    let out = mdfa(
        dir.path(),
        &["allocate", skew.to_str().unwrap(), "--method", "two-agent-identical"],
    );
    assert_eq!(code(&out), 64);

    let out = mdfa(dir.path(), &["allocate", skew.to_str().unwrap(), "--method", "n-agent"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["guarantee_c"], Value::from(4));
}

#[test]
fn parse_problems_exit_65() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let alloc = write_alloc(dir.path(), "alloc.json", "[[0],[]]");
    let cases = [
        "{not json",
        "{\"agents\":1,\"dimensions\":1,\"identical\":true,\"valuations\":[[-1]]}",
        "{\"agents\":1,\"dimensions\":1,\"identical\":true,\"valuations\":[[1.5]]}",
        "{\"agents\":2,\"dimensions\":1,\"valuations\":[[[1]]]}",
    ];
    for text in cases {
        fs::write(&bad, text).unwrap();
        let out = mdfa(
            dir.path(),
            &[
                "verify",
                bad.to_str().unwrap(),
                alloc.to_str().unwrap(),
                "--notion",
                "weak",
                "--c",
                "0",
            ],
        );
        assert_eq!(code(&out), 65, "input: {text}");
        assert!(!out.stderr.is_empty());
    }

    // a missing instance file is an input problem, not a usage problem
    let out = mdfa(
        dir.path(),
        &["exists", "nowhere.json", "--notion", "weak", "--c", "0"],
    );
    assert_eq!(code(&out), 65);

    // allocation that does not fit the instance
    let inst = generated(dir.path(), "inst.json", &["generate", "no-weak-sef1"]);
    let bad_alloc = write_alloc(dir.path(), "bad_alloc.json", "[[0,7],[1,2]]");
    let out = mdfa(
        dir.path(),
        &[
            "verify",
            inst.to_str().unwrap(),
            bad_alloc.to_str().unwrap(),
            "--notion",
            "weak",
            "--c",
            "0",
        ],
    );
    assert_eq!(code(&out), 65);
}

#[test]
fn usage_problems_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let no_args = mdfa(dir.path(), &[]);
    assert_eq!(code(&no_args), 64);

    let unknown_flag = mdfa(dir.path(), &["exists", "x.json", "--wat"]);
    assert_eq!(code(&unknown_flag), 64);

    let bad_notion = mdfa(dir.path(), &["exists", "x.json", "--notion", "medium", "--c", "1"]);
    assert_eq!(code(&bad_notion), 64);

    let odd_total = mdfa(dir.path(), &["generate", "reduce-partition", "--a", "1,1,1"]);
    assert_eq!(code(&odd_total), 64);

    let bad_clause = mdfa(
        dir.path(),
        &["generate", "reduce-mnae3sat", "--vars", "3", "--clause", "0,1"],
    );
    assert_eq!(code(&bad_clause), 64);

    let zero_threads = mdfa(
        dir.path(),
        &["generate", "diagonal", "--c", "1", "--threads", "0"],
    );
    assert_eq!(code(&zero_threads), 64);

    let help = mdfa(dir.path(), &["--help"]);
    assert_eq!(code(&help), 0);
}

#[test]
fn caps_yield_undecided_not_answers() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), "hard.json", &["generate", "no-weak-sef1"]);
    let inst = inst.to_str().unwrap();

    let starved = mdfa(
        dir.path(),
        &["exists", inst, "--notion", "weak", "--c", "1", "--state-cap", "1"],
    );
    assert_eq!(code(&starved), 2);
    let body = stdout_json(&starved);
    assert_eq!(body["answer"], Value::from("undecided"));
    assert!(body["note"].as_str().unwrap().contains("state cap"));

    let scan_starved = mdfa(
        dir.path(),
        &[
            "oracle", "exists", inst, "--notion", "weak", "--c", "1", "--node-cap", "3",
        ],
    );
    assert_eq!(code(&scan_starved), 2);
    assert_eq!(stdout_json(&scan_starved)["answer"], Value::from("undecided"));

    let gap = generated(dir.path(), "gap.json", &["generate", "no-strong-sef1"]);
    let alloc = write_alloc(dir.path(), "alloc.json", "[[0],[1,2]]");
    let node_starved = mdfa(
        dir.path(),
        &[
            "verify",
            gap.to_str().unwrap(),
            alloc.to_str().unwrap(),
            "--notion",
            "strong",
            "--c",
            "1",
            "--node-cap",
            "1",
        ],
    );
    assert_eq!(code(&node_starved), 2);
    assert_eq!(stdout_json(&node_starved)["answer"], Value::from("undecided"));
}

#[test]
fn partition_reduction_writes_the_documented_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = generated(
        dir.path(),
        "partition.json",
        &["generate", "reduce-partition", "--a", "1,1"],
    );
    let body: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(body["agents"], Value::from(2));
    assert_eq!(body["dimensions"], Value::from(2));
    assert_eq!(body["identical"], Value::Bool(true));
    let rows = body["valuations"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[2], serde_json::json!([3, 0]));
    assert_eq!(rows[3], serde_json::json!([0, 3]));
}

#[test]
fn matching_reduction_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("matching.json");
    let alloc = dir.path().join("matching_alloc.json");
    let out = mdfa(
        dir.path(),
        &[
            "generate",
            "reduce-3dm",
            "--ground",
            "2",
            "--triplet",
            "0,0,0",
            "--triplet",
            "1,1,1",
            "--triplet",
            "0,1,1",
            "--out",
            inst.to_str().unwrap(),
            "--allocation-out",
            alloc.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&out), 0);
    let note = String::from_utf8_lossy(&out.stderr);
    assert!(note.contains("c=1"), "{note}");

    let checked = mdfa(
        dir.path(),
        &[
            "verify",
            inst.to_str().unwrap(),
            alloc.to_str().unwrap(),
            "--notion",
            "strong",
            "--c",
            "1",
        ],
    );
    assert_eq!(code(&checked), 0, "a perfect matching exists");

    let oracle = mdfa(
        dir.path(),
        &[
            "oracle",
            "verify",
            inst.to_str().unwrap(),
            alloc.to_str().unwrap(),
            "--notion",
            "strong",
            "--c",
            "1",
        ],
    );
    assert_eq!(code(&oracle), 0, "the oracle agrees");
}

#[test]
fn results_are_reproducible_modulo_timing() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), "gap.json", &["generate", "no-strong-sef1"]);
    let args = ["exists", inst.to_str().unwrap(), "--notion", "strong", "--c", "1"];
    let mut first = stdout_json(&mdfa(dir.path(), &args));
    let mut second = stdout_json(&mdfa(dir.path(), &args));
    first["timing_ms"] = Value::Null;
    second["timing_ms"] = Value::Null;
    assert_eq!(first, second);
}

#[test]
fn generated_files_are_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["generate", "random", "--agents", "3", "--items", "5", "--dimensions", "2"];
    let a = generated(dir.path(), "a.json", &args);
    let b = generated(dir.path(), "b.json", &args);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let mut seeded = args.to_vec();
    seeded.extend(["--seed", "9"]);
    let c = generated(dir.path(), "c.json", &seeded);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());

    // a reparse of what the binary wrote must reach the same instance
    let reparse = mdfa(
        dir.path(),
        &["exists", c.to_str().unwrap(), "--notion", "weak", "--c", "2"],
    );
    assert!(code(&reparse) <= 1, "generated file must load cleanly");
}

#[test]
fn thread_counts_do_not_change_oracle_answers() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generated(dir.path(), "hard.json", &["generate", "no-weak-sef1"]);
    let inst = inst.to_str().unwrap();
    for threads in ["1", "2", "5"] {
        let out = mdfa(
            dir.path(),
            &[
                "oracle", "exists", inst, "--notion", "weak", "--c", "1", "--threads", threads,
            ],
        );
        assert_eq!(code(&out), 1, "threads={threads}");
        assert_eq!(stdout_json(&out)["counters"]["scanned_allocations"], Value::from(8));
    }
}
