use mutacp::analysis::classify;
use std::path::Path;
use std::process::{Command, Output};

fn mutacp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mutacp"))
        .args(args)
        .env_remove("MUTACP_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(table: &str, key: &str) -> String {
    table
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")))
        .unwrap_or_else(|| panic!("{key} missing from {table}"))
        .to_string()
}

#[test]
fn thresholds_table() {
    let o = mutacp(&["thresholds", "--d", "2", "--r", "1"]);
    assert!(o.status.success());
    let t = stdout(&o);
    assert_eq!(value(&t, "survive_all_r"), "1");
    assert_eq!(value(&t, "die_out"), "0.3333333333");
    assert_eq!(value(&t, "window_transition"), "0.6666666667 1");
    assert_eq!(value(&t, "window_weak"), "empty");
    assert_eq!(value(&t, "lambdabound"), "0.6666666667");

    let o = mutacp(&["thresholds", "--d", "6", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let weak = v["window_weak"].as_array().unwrap();
    assert!((weak[0].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert!((weak[1].as_f64().unwrap() - 0.204124).abs() < 1e-6);

    let o = mutacp(&["thresholds", "--d", "1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.tsv"), dir.path().join("b.tsv"));
    for out in [&a, &b] {
        let o = mutacp(&[
            "simulate",
            "--lambda",
            "1.5",
            "--r",
            "0.3",
            "--seed",
            "5",
            "--tmax",
            "5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let o = mutacp(&[
        "simulate", "--r", "0", "--lambda", "5", "--d", "2", "--seed", "7", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["termination"], "extinct");
}

#[test]
fn nonspatial_log_has_no_sites() {
    let o = mutacp(&[
        "simulate",
        "--kind",
        "nonspatial",
        "--lambda",
        "2",
        "--r",
        "0.5",
        "--tmax",
        "3",
    ]);
    assert!(o.status.success());
    let log = stdout(&o);
    assert!(log.starts_with("# mutacp trajectory v1"));
    for line in log.lines().filter(|l| !l.starts_with('#')) {
        assert_eq!(line.split('\t').nth(2), Some("-"));
    }
}

fn sweep_args<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![
        "sweep",
        "--lambdas",
        "0.5,1,1.5",
        "--rs",
        "0.1,0.5,0.9",
        "--trials",
        "100",
        "--tmax",
        "30",
        "--nmax",
        "300",
    ];
    v.extend_from_slice(extra);
    v
}

#[test]
fn sweep_csv() {
    let o = mutacp(&sweep_args(&["--seed", "3"]));
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "# seed=3"));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 10);
    assert!(body[0].starts_with("d,lambda,r,trials"));
    for row in &body[1..] {
        let f: Vec<&str> = row.split(',').collect();
        let (lambda, r): (f64, f64) = (f[1].parse().unwrap(), f[2].parse().unwrap());
        assert_eq!(f[11], classify(2, lambda, r).unwrap().verdict.as_str());
    }
    let again = mutacp(&sweep_args(&["--seed", "3", "--workers", "1"]));
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn sweep_json_mirrors_csv_names() {
    let o = mutacp(&sweep_args(&["--seed", "3", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    let keys: Vec<&str> = rows[0]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    for name in mutacp::montecarlo::CSV_HEADER {
        assert!(keys.contains(&name), "{name}");
    }
    assert_eq!(v["config"]["seed"], "3");
}

#[test]
fn config_file_and_env_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    let text = "# grid\nlambdas = 0.5,1.5\nrs = 0.5\ntrials = 50\ntmax = 20\nseed = 8\n";
    std::fs::write(&path, text).unwrap();
    let run = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_mutacp"));
        cmd.args(["sweep", "--config", path.to_str().unwrap()])
            .args(extra)
            .env_remove("MUTACP_SEED");
        if let Some(s) = env {
            cmd.env("MUTACP_SEED", s);
        }
        stdout(&cmd.output().unwrap())
    };
    let from_file = run(&[], Some("1"));
    assert!(from_file.contains("# seed=8\n") && from_file.contains("# trials=50\n"));
    assert!(run(&["--seed", "2", "--trials", "60"], None)
        .contains("# seed=2\n# confidence=0.95\n# trials=60\n"));
    std::fs::write(&path, "lambdas = 0.5\nrs = 0.5\ntrials = 20\n").unwrap();
    assert!(run(&[], Some("13")).contains("# seed=13\n"));
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "lambdas = 0.5\nrs = 0.5\ntrials = 20\n"
    );

    std::fs::write(&path, "colour = red\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mutacp"))
        .args(["thresholds", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!o.status.success());
}

#[test]
fn exact_probabilities_and_generator_dump() {
    let dir = tempfile::tempdir().unwrap();
    let gen = dir.path().join("q.txt");
    let o = mutacp(&[
        "exact",
        "--graph",
        "twosite",
        "--lambda",
        "1",
        "--r",
        "0.5",
        "--times",
        "0,1",
        "--target",
        "1",
        "--generator",
        gen.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["states"], 5);
    assert_eq!(v["rows"][0]["nonempty"], 1.0);
    assert_eq!(v["rows"][0]["hit"], 0.0);
    assert!(Path::new(&gen).exists());
    let dump = std::fs::read_to_string(&gen).unwrap();
    assert!(dump.starts_with("# row col rate\n"));

    let o = mutacp(&["exact", "--graph", "homtree", "--lambda", "1", "--r", "0.5"]);
    assert!(!o.status.success());
}

#[test]
fn check_suites() {
    let o = mutacp(&["check", "two-site"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("PASS two-site"));
    let o = mutacp(&["check", "coupling", "--trials", "40"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("40 runs"));
    let o = mutacp(&["check", "identities", "--trials", "200", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["passed"], true);
}

#[test]
fn couple_reports_containment() {
    let o = mutacp(&[
        "couple", "--lambda", "1", "--r", "0.3", "--trials", "20", "--tmax", "10", "--seed", "4",
    ]);
    assert!(o.status.success());
    let t = stdout(&o);
    assert_eq!(value(&t, "violations"), "0");
    assert_eq!(value(&t, "max_negative_in_restricted"), "0");
}
