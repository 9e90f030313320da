use std::fs;

use kpplab::io::*;
use kpplab::Error;

const MINIMAL: &str = r#"
kind = "simulate"

[medium]
generator = "homogeneous"
"#;

fn errors(text: &str) -> Vec<String> {
    match parse_config(text) {
        Err(Error::Config(errs)) => errs,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn minimal_config_gets_defaults() {
    let cfg = parse_config(MINIMAL).unwrap();
    assert_eq!(cfg.kind, Kind::Simulate);
    assert_eq!(cfg.seed, 0);
    assert_eq!(cfg.medium.dim, 2);
    assert_eq!(cfg.simulate, SimulateParams::default());
    assert_eq!(cfg.vlin.delta, 0.2);
    assert_eq!(cfg.speed.window, 3);
}

#[test]
fn round_trip_is_exact() {
    let text = r#"
kind = "homogenize"
seed = 17

[medium]
generator = "checkerboard"
dim = 2
fu0 = { law = "two-point", lo = 0.5, hi = 2.0, p = 0.3 }
drift_x = { law = "uniform", lo = -0.1, hi = 0.1 }

[homogenize]
region = { region = "half-space", normal = [1.0, 0.5] }
shape = { source = "ball", radius = 2.0, directions = 32 }

[homogenize.sweep]
eps = [1.0, 0.5, 0.1]
obs_times = [0.0, 0.7]
shifts = { rule = "random", radius = 0.3, seed = 5 }
"#;
    let cfg = parse_config(text).unwrap();
    let again = parse_config(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(cfg.hash(), again.hash());
    assert_eq!(cfg.homogenize.sweep.eps, vec![1.0, 0.5, 0.1]);
}

#[test]
fn hash_ignores_seed_and_output_only() {
    let a = parse_config(MINIMAL).unwrap();
    let mut b = a.clone();
    b.seed = 9;
    b.out = Some("elsewhere".into());
    assert_eq!(a.hash(), b.hash());
    b.simulate.t_final = 11.0;
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn unknown_keys_and_type_errors_carry_paths() {
    let errs = errors(&format!("{MINIMAL}\n[simulate]\nt_finale = 3.0\n"));
    assert!(errs[0].starts_with("simulate"), "{errs:?}");
    assert!(errs[0].contains("t_finale"), "{errs:?}");
    let errs = errors(&format!("{MINIMAL}\n[simulate]\nt_final = \"long\"\n"));
    assert!(errs[0].starts_with("simulate.t_final"), "{errs:?}");
    let errs = errors("kind = \"dance\"\n[medium]\ngenerator = \"homogeneous\"\n");
    assert!(errs[0].starts_with("kind"), "{errs:?}");
}

#[test]
fn constraint_violations_are_all_listed() {
    let text = r#"
kind = "vlin"
[medium]
generator = "homogeneous"
[vlin]
delta = 0.7
theta = 0.0
times = [4.0, 2.0]
"#;
    let errs = errors(text);
    assert!(errs.iter().any(|e| e.starts_with("vlin.delta")), "{errs:?}");
    assert!(errs.iter().any(|e| e.starts_with("vlin.theta")), "{errs:?}");
    assert!(errs.iter().any(|e| e.starts_with("vlin.times")), "{errs:?}");
}

#[test]
fn large_drift_is_rejected_before_solving() {
    let text = r#"
kind = "speed"
[medium]
generator = "homogeneous"
dim = 1
drift_x = { law = "constant", value = 2.5 }
"#;
    let errs = errors(text);
    assert!(errs.iter().any(|e| e.contains("sup|b|^2 < 4 lambda inf fu0")), "{errs:?}");
    let degenerate = "kind = \"simulate\"\n[medium]\ngenerator = \"homogeneous\"\nprofile = \"degenerate\"\n";
    assert!(!errors(degenerate).is_empty());
}

#[test]
fn validate_run_on_a_good_medium_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config("kind = \"validate\"\n[medium]\ngenerator = \"checkerboard\"\n").unwrap();
    let mut lines = Vec::new();
    let rec = run(&cfg, dir.path(), &mut |l| lines.push(l.to_string())).unwrap();
    assert!(rec.passed(), "{rec:?}");
    assert!(lines.iter().any(|l| l.contains("all checks passed")));
    let run_dir = dir.path().join(run_dir_name(&cfg));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(run_dir.join("validation.json")).unwrap()).unwrap();
    assert_eq!(doc["config_hash"], cfg.hash());
    assert_eq!(doc["seed"], 0);
}

#[test]
fn validate_run_reports_failures_without_erroring() {
    let dir = tempfile::tempdir().unwrap();
    let text = "kind = \"validate\"\n[medium]\ngenerator = \"homogeneous\"\ndim = 1\ndrift_x = { law = \"constant\", value = 3.0 }\n";
    let cfg = parse_config(text).unwrap();
    let rec = run(&cfg, dir.path(), &mut |_| {}).unwrap();
    assert!(!rec.passed());
    assert_eq!(rec.checks["drift_bound"], false);
}

const SPEED: &str = r#"
kind = "speed"
seed = 3
[medium]
generator = "homogeneous"
dim = 1
[speed]
h = 0.1
ladder = [16, 32, 64]
horizon = 50
"#;

#[test]
fn speed_run_is_deterministic_and_finds_two() {
    let cfg = parse_config(SPEED).unwrap();
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let r1 = run(&cfg, d1.path(), &mut |_| {}).unwrap();
    let r2 = run(&cfg, d2.path(), &mut |_| {}).unwrap();
    assert!(r1.passed());
    let w = r1.summary["speed_max"];
    assert!((w - 2.0).abs() < 0.15, "{w}");
    assert_eq!(r1.artifacts, r2.artifacts);
    for name in &r1.artifacts {
        let a = fs::read(d1.path().join(run_dir_name(&cfg)).join(name)).unwrap();
        let b = fs::read(d2.path().join(run_dir_name(&cfg)).join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
    let csv = fs::read_to_string(d1.path().join(run_dir_name(&cfg)).join("speeds.csv")).unwrap();
    let head: Vec<&str> = csv.lines().take(3).collect();
    assert_eq!(head[0], "# schema_version=1");
    assert_eq!(head[1], format!("# config_hash={}", cfg.hash()));
    assert_eq!(head[2], "# seed=3");
}

#[test]
fn registry_lists_finished_partial_and_unreadable_runs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(registry_list(dir.path()).unwrap().is_empty());
    assert!(registry_list(&dir.path().join("missing")).unwrap().is_empty());
    let cfg = parse_config("kind = \"validate\"\n[medium]\ngenerator = \"homogeneous\"\n").unwrap();
    run(&cfg, dir.path(), &mut |_| {}).unwrap();
    let list = registry_list(dir.path()).unwrap();
    assert_eq!(list.len(), 1);
    assert_eq!(list[0].status, EntryStatus::Finished);
    assert!(list[0].record.as_ref().unwrap().summary.contains_key("checks"));

    let text = fs::read_to_string(list[0].dir.join("record.json")).unwrap();
    let cut = dir.path().join("validate-truncated");
    fs::create_dir(&cut).unwrap();
    fs::write(cut.join("record.json"), &text[..text.len() / 2]).unwrap();
    let junk = dir.path().join("validate-junk");
    fs::create_dir(&junk).unwrap();
    fs::write(junk.join("record.json"), "{\"kind\": 4}").unwrap();
    let list = registry_list(dir.path()).unwrap();
    assert_eq!(list.len(), 3);
    let status = |name: &str| list.iter().find(|e| e.dir.ends_with(name)).unwrap().status.clone();
    assert_eq!(status("validate-truncated"), EntryStatus::Partial);
    assert!(matches!(status("validate-junk"), EntryStatus::Unreadable(_)));
}
