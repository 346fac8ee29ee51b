use std::process::{Command, Output};

use serde_json::Value;

fn charfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charfield"))
        .args(args)
        .env_remove("CHARFIELD_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_passes_with_exit_zero() {
    let out = charfield(&[
        "verify", "lemma1", "--field", "fp:5", "--trials", "30", "--seed", "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["scenario"], "lemma1");
    assert_eq!(r["pass"], true);
    assert_eq!(r["seed"], 4);
    assert_eq!(r["counts"]["trials"], 30);
    assert!(r["runtime_ms"].is_null());
}

#[test]
fn failing_check_exits_one() {
    // the 2-adic version of the ball-image identity does not hold
    let out = charfield(&[
        "verify", "lemma4", "--p", "2", "--level", "5", "--trials", "20",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["pass"], false);
    assert!(!r["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn bad_arguments_exit_two() {
    for args in [
        &["verify", "lemma9"][..],
        &["verify", "theorem1", "--field", "fp:4"],
        &["verify", "theorem1"],
        &["verify", "remark1", "--field", "fp:5"],
        &["padic", "sqrt", "--p", "5", "--value", "2"],
        &["dist", "push", "--field", "fp:5", "--mu", "0:1/3"],
    ] {
        let out = charfield(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = charfield(&[
        "verify",
        "theorem3",
        "--p",
        "3",
        "--m",
        "1",
        "--trials",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_charfield"));
        cmd.args(["verify", "theorem2", "--trials", "10"])
            .args(extra)
            .env_remove("CHARFIELD_SEED");
        if let Some(s) = env {
            cmd.env("CHARFIELD_SEED", s);
        }
        cmd.output().unwrap()
    };
    let from_env = run(Some("77"), &[]);
    let from_flag = run(None, &["--seed", "77"]);
    assert_eq!(from_env.stdout, from_flag.stdout);
    assert_eq!(json(&from_env)["seed"], 77);
    assert_eq!(json(&run(None, &[]))["seed"], 0);
    assert_eq!(run(Some("x"), &[]).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "verify", "lemma5", "--p", "3", "--trials", "8", "--seed", "2",
    ];
    let one = charfield(&[&["--threads", "1"][..], &args].concat());
    let four = charfield(&[&["--threads", "4"][..], &args].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn padic_commands() {
    let out = charfield(&["padic", "sqrt", "--p", "2", "--value", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["json"]["digits"][0], 1);
    // -3 = ...11101 in base 2
    assert_eq!(r["json"]["digits"][1], 0);
    assert_eq!(r["json"]["digits"][2], 1);
    let b = json(&charfield(&["padic", "branch", "--p", "7"]));
    assert_eq!(b["primitive_root"], 3);
    let n = json(&charfield(&["padic", "norm", "--p", "3", "--value", "2/9"]));
    assert_eq!(n, "9/1");
    let b2 = json(&charfield(&["padic", "branch", "--p", "2"]));
    assert_eq!(b2["rule"], "unit_one_mod_four");
}

#[test]
fn dist_commands() {
    let ind = json(&charfield(&[
        "dist",
        "independent",
        "--field",
        "fp:5",
        "--mu",
        "1:1/2,4:1/2",
        "--nu",
        "0:1",
    ]));
    assert_eq!(ind["independent"], true);
    let dep = json(&charfield(&[
        "dist",
        "independent",
        "--field",
        "fp:5",
        "--mu",
        "0:1/2,1:1/2",
    ]));
    assert_eq!(dep["independent"], false);
    let cls = json(&charfield(&[
        "dist",
        "classify",
        "--field",
        "fp:5",
        "--mu",
        "0:1/5,1:1/5,2:1/5,3:1/5,4:1/5",
    ]));
    assert_eq!(cls["class"], "haar_shift");
    let feq = json(&charfield(&[
        "dist",
        "feq",
        "--field",
        "fp:3",
        "--mu",
        "0:1/2,1:1/2",
    ]));
    assert!(feq.is_object());
}
