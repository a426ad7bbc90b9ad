use std::path::PathBuf;
use std::process::{Command, Output};

fn ellhyp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellhyp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ellhyp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn theta_at_zero_nome_is_linear() {
    let o = ellhyp(&["eval", "theta", "0.3", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.7 0.0\n");
}

#[test]
fn empty_products_and_sums_are_one() {
    for args in [
        &["eval", "efac", "a=0.4", "k=0"][..],
        &["eval", "vsum", "0.3+0.1i", "n=0"],
        &["eval", "esum", "0"],
    ] {
        let o = ellhyp(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        assert_eq!(stdout(&o), "1.0 0.0\n", "{args:?}");
    }
}

#[test]
fn complex_argument_forms_agree() {
    let a = stdout(&ellhyp(&["eval", "egamma", "0.5+0.2i"]));
    let b = stdout(&ellhyp(&["eval", "egamma", "0.5,0.2"]));
    let c = stdout(&ellhyp(&["eval", "egamma", "x=0.5+0.2i", "--p", "0.2+0.1i"]));
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.split_whitespace().count(), 2);
}

#[test]
fn eval_exit_codes() {
    let unknown = ellhyp(&["eval", "zeta", "1"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("beta_integral"));
    assert_eq!(ellhyp(&["eval", "theta"]).status.code(), Some(2));
    assert_eq!(ellhyp(&["eval", "theta", "abc"]).status.code(), Some(2));
    assert_eq!(ellhyp(&["eval", "theta", "0"]).status.code(), Some(3));
    assert_eq!(ellhyp(&["eval", "theta", "0.5", "--p", "1.5"]).status.code(), Some(2));
}

#[test]
fn check_exit_codes() {
    assert_eq!(ellhyp(&["check", "nosuch"]).status.code(), Some(2));
    assert_eq!(ellhyp(&["check", "theta", "--trials", "many"]).status.code(), Some(2));
    assert_eq!(ellhyp(&["check", "theta", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(ellhyp(&["check", "theta", "--trials", "3"]).status.code(), Some(0));
}

#[test]
fn unattainable_tolerance_fails_and_still_reports() {
    let path = tmp("strict.json");
    let o = ellhyp(&["check", "series", "--tol", "1e-30", "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["summary"]["failed"].as_u64().unwrap() > 0);
    assert_eq!(v["context"]["tol"], 1e-30);
}

#[test]
fn every_suite_passes_at_a_real_nome() {
    let o = ellhyp(&["check", "all", "--p", "0.3", "--q", "0.25", "--json", "-"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let names: Vec<_> = v["suites"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["name"].as_str().unwrap())
        .collect();
    assert_eq!(names.len(), 12);
    assert!(names.contains(&"fusion") && names.contains(&"beta-integral"));
    assert_eq!(v["summary"]["failed"], 0);
}

#[test]
fn report_schema_and_totals() {
    let o = ellhyp(&["check", "toolkit", "--seed", "3", "--trials", "4", "--json", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["suite"], "toolkit");
    assert_eq!(v["context"]["seed"], 3);
    assert_eq!(v["context"]["p"], serde_json::json!([0.2, 0.1]));
    assert!(v["wall_ms"].is_u64());
    let checks = v["checks"].as_array().unwrap();
    for c in checks {
        for key in ["id", "params", "residual", "scale", "pass"] {
            assert!(c.get(key).is_some(), "{key} missing in {c}");
        }
    }
    let passed = checks.iter().filter(|c| c["pass"] == true).count() as u64;
    assert_eq!(v["summary"]["total"].as_u64(), Some(checks.len() as u64));
    assert_eq!(v["summary"]["passed"].as_u64(), Some(passed));
    let keys: Vec<(String, u64)> = checks
        .iter()
        .map(|c| (c["id"].as_str().unwrap().to_string(), c["trial"].as_u64().unwrap()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn seeded_reports_are_byte_identical() {
    let run = |name: &str, threads: &str| {
        let path = tmp(name);
        let o = ellhyp(&[
            "check",
            "all",
            "--seed",
            "7",
            "--no-timestamp",
            "--threads",
            threads,
            "--json",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let a = run("a.json", "1");
    let b = run("b.json", "4");
    assert!(!String::from_utf8_lossy(&a).contains("wall_ms"));
    assert_eq!(a, b);
}

#[test]
fn flags_override_config_file() {
    let cfg = tmp("run.cfg");
    std::fs::write(
        &cfg,
        "# defaults\np = 0.3\nq=0.25\nseed=11\ntrials=2\nno_timestamp=true\n",
    )
    .unwrap();
    let base = ["check", "theta", "--config", cfg.to_str().unwrap(), "--json", "-"];
    let v: serde_json::Value = serde_json::from_str(&stdout(&ellhyp(&base))).unwrap();
    assert_eq!(v["context"]["seed"], 11);
    assert_eq!(v["context"]["q"], serde_json::json!([0.25, 0.0]));
    assert!(v.get("wall_ms").is_none());
    let mut args = base.to_vec();
    args.extend(["--seed", "5", "--q", "-0.3+0.1i"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&ellhyp(&args))).unwrap();
    assert_eq!(v["context"]["seed"], 5);
    assert_eq!(v["context"]["q"], serde_json::json!([-0.3, 0.1]));
    assert_eq!(v["context"]["p"], serde_json::json!([0.3, 0.0]));

    std::fs::write(&cfg, "colour=blue\n").unwrap();
    assert_eq!(
        ellhyp(&["check", "theta", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}
