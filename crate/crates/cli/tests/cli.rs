use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;
use trobust::data::STACKLOSS_CSV;
use trobust::rng::{sample_normal, sample_student_t};
use trobust::RngStream;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trobust")).args(args).env_remove("TROBUST_THREADS").output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn nu_hats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|r| r["nu_hat"]["finite"].as_f64().unwrap()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn ols_on_bundled_data_gives_the_textbook_coefficients() {
    let v = json(&["fit", "@stackloss", "--add-intercept", "--method", "ols", "--format", "json"]);
    let beta: Vec<f64> = v["beta"].as_array().unwrap().iter().map(|b| b.as_f64().unwrap()).collect();
    // normal-equations solution
    let expected = [-39.919_674_4, 0.715_640_2, 1.295_286_1, -0.152_122_5];
    for (b, e) in beta.iter().zip(expected) {
        assert!((b - e).abs() < 1e-6, "{b} vs {e}");
    }
}

#[test]
fn adjusted_fit_snapshot() {
    let v = json(&["fit", "@stackloss", "--add-intercept", "--format", "json"]);
    let est = &v["nu_estimate"];
    assert_eq!(est["method"], "adjusted_profile");
    assert_eq!(est["flatness_detected"], false);
    let nu = est["nu_hat"]["finite"].as_f64().unwrap();
    assert!((nu - 4.216_443).abs() < 1e-4, "{nu}");
}

#[test]
fn fixed_nu_is_bitwise_repeatable() {
    let a = run(&["fit", "@stackloss", "--add-intercept", "--method", "fixed:2", "--format", "json"]);
    let b = run(&["fit", "@stackloss", "--add-intercept", "--nu", "2", "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn scaling_the_response_leaves_nu_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let mut lines = STACKLOSS_CSV.lines();
    let mut text = format!("{}\n", lines.next().unwrap());
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let mut fields: Vec<String> = line.split(',').map(String::from).collect();
        let y: f64 = fields[3].trim().parse().unwrap();
        fields[3] = (3.0 * y).to_string();
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    let scaled = write(dir.path(), "scaled.csv", &text);
    let base = nu_hats(&json(&["estimate-nu", "@stackloss", "--add-intercept", "--format", "json"]));
    let args = ["estimate-nu", scaled.as_str(), "--response", "stack_loss", "--add-intercept", "--format", "json"];
    let after = nu_hats(&json(&args));
    for (u, v) in base.iter().zip(&after) {
        assert!((v / u - 1.0).abs() < 1e-4, "{u} vs {v}");
    }
}

#[test]
fn synthetic_t2_sample_gives_plausible_estimates() {
    let mut rng = RngStream::new(11, 0).rng();
    let x = sample_normal(300, &mut rng);
    let e = sample_student_t(2.0, 300, &mut rng).unwrap();
    let mut text = String::from("x,y\n");
    for (xi, ei) in x.iter().zip(&e) {
        text.push_str(&format!("{xi},{}\n", 1.0 + xi + ei));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "t2.csv", &text);
    let table = dir.path().join("nu.csv");
    let args = ["estimate-nu", &path, "--response", "y", "--add-intercept", "--format", "json", "--out"];
    let v = json(&[&args[..], &[table.to_str().unwrap()]].concat());
    for nu in nu_hats(&v) {
        assert!((1.0..=4.0).contains(&nu), "{nu}");
    }
    let written = std::fs::read_to_string(table).unwrap();
    assert!(written.starts_with("method,metric,value,n,p,nu_true,diagnostics"));
    assert_eq!(written.lines().count(), 1 + 4 * 5);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["fit", "@stackloss", "--response", "missing"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));

    let bad = write(dir.path(), "bad.csv", "x,y\n1,2\n2,oops\n3,4\n");
    let out = run(&["fit", &bad, "--response", "y"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let short = write(dir.path(), "short.csv", "a,b,y\n1,2,3\n4,5,7\n");
    let out = run(&["fit", &short, "--response", "y", "--add-intercept"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n >= p + 1"));

    assert_eq!(run(&["fit", "@stackloss", "--method", "lasso"]).status.code(), Some(2));
    assert_eq!(run(&["fit", "@stackloss", "--method", "ols", "--nu", "3"]).status.code(), Some(2));
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--preset", "no-such-study"]).status.code(), Some(2));
}

#[test]
fn exact_fit_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let exact = write(dir.path(), "exact.csv", "x,y\n1,3\n2,5\n3,7\n4,9\n5,11\n");
    let out = run(&["fit", &exact, "--response", "y", "--add-intercept", "--method", "profile"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn smoke_preset_runs_quickly_and_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = run(&["simulate", "--preset", "smoke", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(start.elapsed().as_secs_f64() < 10.0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("smoke.json")).unwrap()).unwrap();
    assert_eq!(report["replications"], 2);
    let csv = std::fs::read_to_string(dir.path().join("smoke.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(2).is_some_and(|v| v == "NA" || v.parse::<f64>().is_ok())));
}

#[test]
fn spec_file_overrides_and_thread_count_agree() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "mini.json",
        r#"{
            "design": {"gaussian_iid": {"n": 60, "p": 2, "intercept": true}},
            "true_beta": [0.5, 1.0],
            "true_sigma": 2.0,
            "errors": {"base": {"student_t": 4.0}, "contamination": {"kind": "two_point", "rate": 0.1}},
            "replications": 3,
            "master_seed": 9,
            "methods": ["adjusted", "pseudo", "huber:auto"]
        }"#,
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for (threads, out) in [("1", &out_a), ("3", &out_b)] {
        let o = run(&["simulate", "--spec", &spec, "--replications", "6", "--threads", threads, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read_to_string(out_a.join("mini.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(out_b.join("mini.csv")).unwrap());
    assert!(a.contains("huber:auto,successes,6.0"));

    let broken = write(dir.path(), "broken.json", r#"{"design": {"gaussian_iid": {"n": 60, "p": 2, "intercept": true}}, "true_sigma": 1.0}"#);
    let o = run(&["simulate", "--spec", &broken]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("true_beta"));
}
