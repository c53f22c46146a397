use std::path::PathBuf;
use std::process::{Command, Output};

fn spec(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "specs", name].iter().collect();
    p.display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempora")).args(args).env_remove("TEMPORA_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn check_exit_codes() {
    assert_eq!(code(&run(&["check", &spec("early.tmsr")])), 0);
    assert_eq!(code(&run(&["check", &spec("skipping.tmsr")])), 1);
    let broken = run(&["check", &spec("broken.tmsr")]);
    assert_eq!(code(&broken), 2);
    let err = String::from_utf8(broken.stderr).unwrap();
    assert!(err.contains("broken.tmsr:2:36: error:"), "{err}");
    assert_eq!(code(&run(&["check", "/nonexistent.tmsr"])), 2);
}

#[test]
fn witness_is_printed_and_replayable() {
    let o = run(&["check", "--witness", &spec("nonce.tmsr")]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("witness (validated):"));
    assert!(text.contains("rule mint") && text.contains("rule use"));

    let o = run(&["--json", "check", "--witness", &spec("nonce.tmsr")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let trace = serde_json::to_string(&v["payload"]["witness"]).unwrap();
    let dir = std::env::temp_dir().join(format!("tempora-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("witness.json");
    std::fs::write(&file, trace).unwrap();
    let o = run(&["validate", &spec("nonce.tmsr"), file.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn both_modes_agree() {
    for name in ["early.tmsr", "skipping.tmsr", "nonce.tmsr"] {
        let a = code(&run(&["check", &spec(name)]));
        assert_eq!(code(&run(&["check", "--mode", "depth", &spec(name)])), a, "{name}");
        assert_eq!(code(&run(&["check", "--workers", "3", &spec(name)])), a, "{name}");
    }
}

#[test]
fn dmax_override_must_not_shrink() {
    let o = run(&["check", "--dmax", "1", &spec("early.tmsr")]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("below the required bound 5"));
    assert_eq!(code(&run(&["check", "--dmax", "7", &spec("early.tmsr")])), 0);
}

#[test]
fn state_budget() {
    assert_eq!(code(&run(&["check", "--max-states", "2", &spec("nonce.tmsr")])), 2);
}

#[test]
fn unbalanced_needs_a_depth() {
    assert_eq!(code(&run(&["check", &spec("unbalanced.tmsr")])), 2);
    let o = run(&["check", "--allow-unbalanced", "--concrete-depth", "3", &spec("unbalanced.tmsr")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("incomplete"));
}

#[test]
fn abstract_output() {
    let o = run(&["abstract", "{Time@0}"]);
    assert_eq!(stdout(&o), "<{Time}> / [{Time}_Z]\n");
    let o = run(&["abstract", "--dmax", "3", "{Time@0.5, F@1.25, G@2.5}"]);
    assert_eq!(stdout(&o), "<{Time},1,{F},1,{G}> / [{}_Z,{F},{G,Time}]\n");
    let o = run(&["abstract", &spec("nonce.tmsr")]);
    assert_eq!(stdout(&o), "<{P(a),Time}> / [{P(a),Time}_Z]\n");
    assert_eq!(code(&run(&["abstract", "{F@1}"])), 2);
}

#[test]
fn bound_from_flags_and_spec() {
    let o = run(&["bound", "--preds", "2", "--symbols", "1", "--m", "2", "--k", "1", "--dmax", "0"]);
    assert_eq!(stdout(&o), "J=2 E=1 m=2 k=1 dmax=0\nL=800\n");
    let o = run(&["bound", &spec("early.tmsr")]);
    assert!(stdout(&o).ends_with("L=1792\n"), "{}", stdout(&o));
    assert_eq!(code(&run(&["bound", "--m", "2"])), 2);
}

#[test]
fn validate_reports_violations() {
    let ok = run(&["validate", &spec("early.tmsr"), &spec("traces/early-ok.json")]);
    assert_eq!(code(&ok), 0);
    let bad = run(&["validate", &spec("skipping.tmsr"), &spec("traces/skipping-big-tick.json")]);
    assert_eq!(code(&bad), 1);
    assert!(stdout(&bad).contains("violation at step 0: critical configuration {F@7/2, Time@7/2}"));
    let o = run(&["validate", "--no-goal", &spec("skipping.tmsr"), &spec("traces/early-ok.json")]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(&["validate", &spec("early.tmsr"), &spec("traces/malformed.json")])), 2);
}

#[test]
fn json_is_byte_stable() {
    for args in [
        vec!["--json", "check", "--witness", "NONCE"],
        vec!["--json", "validate", "SKIP", "BIGTICK"],
        vec!["--json", "bound", "NONCE"],
    ] {
        let args: Vec<String> = args
            .iter()
            .map(|a| match *a {
                "NONCE" => spec("nonce.tmsr"),
                "SKIP" => spec("skipping.tmsr"),
                "BIGTICK" => spec("traces/skipping-big-tick.json"),
                other => other.to_string(),
            })
            .collect();
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = run(&args).stdout;
        assert_eq!(run(&args).stdout, first);
        let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
        assert_eq!(v["durationMillis"], 0);
    }
}

#[test]
fn json_errors_carry_exit_two() {
    let o = run(&["--json", "check", &spec("broken.tmsr")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["exitCode"], 2);
    assert_eq!(v["payload"]["errors"].as_array().unwrap().len(), 2);
}

#[test]
fn fuzz_is_seeded() {
    let a = Command::new(env!("CARGO_BIN_EXE_tempora")).args(["fuzz", "--count", "20"]).env("TEMPORA_SEED", "9").output().unwrap();
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    let b = Command::new(env!("CARGO_BIN_EXE_tempora")).args(["fuzz", "--count", "20"]).env("TEMPORA_SEED", "9").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("seed 9: 20 problems"));
}
