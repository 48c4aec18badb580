use std::process::{Command, Output};

fn twobridge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twobridge"))
        .args(args)
        .env_remove("TWOBRIDGE_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn bound_example_word() {
    let o = twobridge(&[
        "bound",
        "--word",
        "1,1,1,1,-1,-1,1,1,1,1",
        "--k",
        "2",
        "--s",
        "1",
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["n"], 10);
    assert_eq!(v["m"], 5);
    assert_eq!(v["bound"], 3);
}

#[test]
fn bound_of_single_pair_is_one() {
    let o = twobridge(&["bound", "--word", "1,1", "--format", "csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row = lines.next().unwrap();
    // The word column is quoted because it contains commas.
    assert!(row.starts_with("\"1,1\","));
    let bound_col = header.iter().position(|h| *h == "bound").unwrap();
    let fields: Vec<&str> = row.trim_start_matches("\"1,1\",").split(',').collect();
    assert_eq!(fields[bound_col - 1], "1");
}

#[test]
fn negative_first_entry_parses() {
    let o = twobridge(&["bound", "--word", "-1,1", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn bad_words_exit_with_validation_status() {
    let zero = twobridge(&["bound", "--word", "1,0"]);
    assert_eq!(zero.status.code(), Some(1));
    assert!(stderr(&zero).contains("entry 1 is zero"));

    let token = twobridge(&["bound", "--word", "1,abc"]);
    assert_eq!(token.status.code(), Some(1));
    assert!(stderr(&token).contains("abc"));

    let odd = twobridge(&["bound", "--word", "1,2,3"]);
    assert_eq!(odd.status.code(), Some(1));

    let bad_k = twobridge(&["bound", "--word", "1,1", "--k", "0"]);
    assert_eq!(bad_k.status.code(), Some(1));
}

#[test]
fn unknown_flag_is_a_validation_error() {
    assert_eq!(twobridge(&["exact", "--bogus"]).status.code(), Some(1));
    assert_eq!(twobridge(&["--help"]).status.code(), Some(0));
}

#[test]
fn exact_table_rows() {
    let o = twobridge(&["exact", "--n-max", "12", "--format", "csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[1], "2,words,true,1,1,0.500000000000,0,1");
}

#[test]
fn exact_knots_mode_respects_cap() {
    let ok = twobridge(&[
        "exact", "--n-max", "6", "--mode", "knots", "--format", "csv",
    ]);
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("4,knots,true,27,17,"));

    let capped = twobridge(&["exact", "--n-max", "16", "--mode", "knots", "--cap", "10"]);
    assert_eq!(capped.status.code(), Some(2));
}

#[test]
fn sweep_is_reproducible_and_worker_independent() {
    let args = [
        "sweep",
        "--n-grid",
        "40,80",
        "--samples",
        "64",
        "--seed",
        "99",
        "--format",
        "csv",
    ];
    let a = twobridge(&[&args[..], &["--workers", "1"]].concat());
    let b = twobridge(&[&args[..], &["--workers", "3"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 3);
}

#[test]
fn sweep_reports_work_cap() {
    let o = twobridge(&[
        "sweep",
        "--n-grid",
        "50,100",
        "--samples",
        "50",
        "--work-cap",
        "3000",
        "--format",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.lines().last().unwrap().contains(",30,50,false,"));
}

#[test]
fn worker_env_is_echoed() {
    let o = Command::new(env!("CARGO_BIN_EXE_twobridge"))
        .args([
            "sweep",
            "--n-grid",
            "20,40",
            "--samples",
            "8",
            "--format",
            "json",
        ])
        .env("TWOBRIDGE_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["workers"], 2);
    assert_eq!(v["workers_source"], "env");
}

#[test]
fn walk_single_trial_has_no_standard_error() {
    let o = twobridge(&["walk", "--t", "1000", "--trials", "1", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["std_error"].is_null());
    assert_eq!(v["types"], 4);

    let t = twobridge(&["walk", "--t", "1000", "--trials", "1", "--format", "table"]);
    assert!(stdout(&t).contains("undefined"));
}

#[test]
fn enumerate_lists_every_word() {
    let o = twobridge(&["enumerate", "--n", "4", "--format", "csv"]);
    assert!(o.status.success());
    // 3 * 4 words of genus 1 plus 1 * 16 of genus 2.
    assert_eq!(stdout(&o).lines().count(), 1 + 28);
}

#[test]
fn trace_round_trips_through_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    let o = twobridge(&[
        "bound",
        "--word",
        "3,1,-1,2,-2,1,-1,-3",
        "--k",
        "2",
        "--s",
        "1",
        "--trace",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let trace_path = dir.path().join("t.json");
    std::fs::write(&trace_path, v["trace"].to_string()).unwrap();

    let r = twobridge(&[
        "replay",
        "--trace-file",
        trace_path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(r.status.success(), "{}", stderr(&r));
    let rv: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(rv["bound"], v["bound"]);

    let mut tampered = v["trace"].clone();
    tampered["bound"] = serde_json::json!(0);
    std::fs::write(&trace_path, tampered.to_string()).unwrap();
    let bad = twobridge(&["replay", "--trace-file", trace_path.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(3));
}
