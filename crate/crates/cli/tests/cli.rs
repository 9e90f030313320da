use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kpplab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpplab"))
        .args(args)
        .env("KPPLAB_OUT", out)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn validate_exits_zero_and_lists() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", "[medium]\ngenerator = \"checkerboard\"\n");
    let out = kpplab(&["validate", "--config", &cfg, "--seed", "4"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("all checks passed"));
    let listed = kpplab(&["list"], dir.path());
    let text = String::from_utf8_lossy(&listed.stdout);
    assert!(text.contains("-s4 finished pass"), "{text}");
}

#[test]
fn rejected_config_prints_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.toml",
        "[medium]\ngenerator = \"homogeneous\"\ndim = 1\ndrift_x = { law = \"constant\", value = 2.5 }\n",
    );
    let out = kpplab(&["speed", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["details"][0].as_str().unwrap().contains("4 lambda"));
    // nothing was run
    assert!(fs::read_dir(dir.path()).unwrap().all(|e| e.unwrap().path().extension().is_some()));
}

#[test]
fn kind_mismatch_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "k.toml", "kind = \"wulff\"\n[medium]\ngenerator = \"homogeneous\"\n");
    let out = kpplab(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_emits_requested_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "[medium]\ngenerator = \"homogeneous\"\ndim = 1\n[simulate]\nh = 0.1\nt_final = 2.0\n",
    );
    let out = kpplab(
        &["simulate", "--config", &cfg, "--emit-snapshots", "1.5,0.5", "--threads", "2"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.is_dir())
        .unwrap();
    for name in ["snapshot-t0.5.csv", "snapshot-t1.5.csv", "final.csv", "config.toml", "record.json"] {
        assert!(run.join(name).exists(), "{name} missing");
    }
}
