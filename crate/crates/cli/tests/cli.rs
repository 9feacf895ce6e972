use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_as-lab")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_as-lab")).args(args).env(key, val).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_then_eval_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let o = run(&["generate", "--kind", "uniform_ball", "--n", "4", "--seed", "42", "--out", p(&cfg)]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&cfg)["points"].as_array().unwrap().len(), 4);
    let again = dir.path().join("c2.json");
    run(&["generate", "--kind", "uniform_ball", "--n", "4", "--seed", "42", "--out", p(&again)]);
    assert_eq!(fs::read(&cfg).unwrap(), fs::read(&again).unwrap());

    let value = |m: &str| {
        let o = run(&["eval", "--config", p(&cfg), "--method", m, "--seed", "1"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v = stdout_json(&o);
        (v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap(), v)
    };
    let (re, im, direct) = value("direct");
    assert_eq!(direct["method"], "direct");
    assert!(direct["det_a"].is_array() && direct["delta"].is_array());
    for m in ["perm", "angular"] {
        let (r, i, _) = value(m);
        assert!((r - re).abs() < 1e-12 && (i - im).abs() < 1e-12, "{m}");
    }
    let (r, _, sampled) = value("perm-sampled");
    let se = sampled["stderr"][0].as_f64().unwrap();
    assert!((r - re).abs() <= 5.0 * se);
    assert_eq!(sampled["samples"], 100_000);
}

#[test]
fn eval_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"points": [[0,0,0],[1,0,0],[0,1,0]]}"#).unwrap();
    let o = run(&["eval", "--config", p(&cfg), "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method,re,im,abs,stderr_re,stderr_im"));
    assert!(lines.next().unwrap().starts_with("direct,"));
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"points": [[0,0,0]]}"#,
        r#"{"points": [[0,0,0],[1,1,1],[0,0,0]]}"#,
        r#"{"points": [[0,0,0],[1,1]]}"#,
        r#"{"pts": []}"#,
        "not json",
    ];
    for (i, body) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("bad{i}.json"));
        fs::write(&cfg, body).unwrap();
        let o = run(&["eval", "--config", p(&cfg)]);
        assert_eq!(code(&o), 3, "{body}");
        assert!(!o.stderr.is_empty());
    }
    let cfg = dir.path().join("five.json");
    fs::write(&cfg, r#"{"points": [[0,0,0],[1,0,0],[0,1,0],[0,0,1],[1,1,1]]}"#).unwrap();
    assert_eq!(code(&run(&["eval", "--config", p(&cfg), "--method", "angular"])), 3);
    assert_eq!(code(&run(&["eval", "--config", p(&dir.path().join("missing.json"))])), 3);
    assert_eq!(code(&run(&["verify", "--n", "6", "--methods", "direct,perm"])), 3);
    assert_eq!(code(&run(&["verify", "--n", "4", "--methods", "direct"])), 3);
    assert_eq!(code(&run(&["generate", "--kind", "pentagram", "--n", "4"])), 3);
    assert_eq!(code(&run(&["generate", "--kind", "near_degenerate", "--n", "4", "--epsilon", "0.5"])), 3);
    assert_eq!(code(&run(&["scan", "--n", "4", "--trials", "0"])), 3);
    assert_eq!(code(&run(&["frobnicate"])), 3);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn verify_pass_and_disagreement() {
    let o = run(&["verify", "--n", "4", "--trials", "50", "--methods", "direct,perm,angular", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!(v["max_rel_dev"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 3);
    assert_eq!(v["passed"], true);
    // a zero tolerance turns round-off into disagreement
    let o = run(&["verify", "--n", "4", "--trials", "50", "--methods", "direct,angular", "--tolerance", "0"]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert!(v["disagreement_count"].as_u64().unwrap() > 0);
    assert!(v["disagreements"][0]["points"].is_array());
}

#[test]
fn scan_report_rows_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let (rep, rows) = (dir.path().join("r.json"), dir.path().join("rows.csv"));
    let o = run(&["scan", "--n", "4", "--trials", "2000", "--seed", "8", "--out", p(&rep), "--csv", p(&rows)]);
    assert_eq!(code(&o), 0);
    let r = json(&rep);
    assert_eq!(r["trials"], 2000);
    assert!(r["min_abs_d"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert_eq!(r["violation_count"], 0);
    let text = fs::read_to_string(&rows).unwrap();
    assert_eq!(text.lines().count(), 2001);
    assert!(text.starts_with("trial,epsilon,re,im,abs,flags\n0,"));

    // the argmin dump replays to the recorded value
    let argmin = &r["argmin"];
    let cfg = dir.path().join("argmin.json");
    fs::write(&cfg, serde_json::json!({"points": argmin["points"]}).to_string()).unwrap();
    let e = stdout_json(&run(&["eval", "--config", p(&cfg)]));
    assert_eq!(e["re"], argmin["re"]);
    assert_eq!(e["im"], argmin["im"]);
}

#[test]
fn scan_is_independent_of_thread_count() {
    let args = ["scan", "--n", "5", "--trials", "500", "--seed", "2", "--format", "csv"];
    let one = run_env(&args, "AS_LAB_THREADS", "1");
    let four = run_env(&args, "AS_LAB_THREADS", "4");
    assert_eq!(code(&one), 0);
    assert!(!one.stdout.is_empty());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn findings_exit_2_with_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let (rep, findings) = (dir.path().join("r.json"), dir.path().join("f.json"));
    let o = run(&[
        "scan", "--n", "4", "--trials", "200", "--threshold", "1.2", "--out", p(&rep), "--findings", p(&findings),
    ]);
    assert_eq!(code(&o), 2);
    let f = json(&findings);
    let dumps = f[0]["violations"].as_array().unwrap();
    assert!(!dumps.is_empty());
    assert_eq!(json(&rep)["violation_count"].as_u64().unwrap() as usize, dumps.len());
    for d in dumps {
        assert!(d["abs"].as_f64().unwrap() < 1.2);
        assert_eq!(d["points"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn epsilon_sweep_csv() {
    let o = run(&["scan", "--n", "4", "--trials", "5", "--epsilon", "1e-2,1e-4,1e-6,1e-8", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 21);
    let eps: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(eps.iter().filter(|e| **e == "1e-8").count(), 5);
}

#[test]
fn discover_and_evaluate_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("formula.json");
    let o = run(&["discover", "--n", "4", "--max-slots", "6", "--seed", "20190314", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let f = json(&out);
    assert_eq!(f["re"].as_array().unwrap().len(), 5);
    assert_eq!(f["im"].as_array().unwrap().len(), 2);
    assert_eq!(f["diagnostics"]["seed"], 20190314);
    assert!(f["diagnostics"]["holdout_residual"]["re"].as_f64().unwrap() <= 1e-7);
    assert_eq!(f["re"][0], serde_json::json!({"coeff": [3, 8], "factors": []}));

    let cfg = dir.path().join("c.json");
    run(&["generate", "--kind", "gaussian", "--n", "4", "--seed", "5", "--out", p(&cfg)]);
    let direct = stdout_json(&run(&["eval", "--config", p(&cfg)]));
    let found = stdout_json(&run(&["eval", "--config", p(&cfg), "--method", "angular", "--formula", p(&out)]));
    for k in ["re", "im"] {
        assert!((direct[k].as_f64().unwrap() - found[k].as_f64().unwrap()).abs() < 1e-10);
    }

    let csv = run(&["discover", "--n", "4", "--max-slots", "6", "--seed", "20190314", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().nth(1).unwrap().starts_with("re,3,8,"));
}

#[test]
fn incomplete_basis_is_reported() {
    // two slots cannot express D at n = 4
    let o = run(&["discover", "--n", "4", "--max-slots", "2", "--seed", "1"]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert!(v["diagnostics"]["holdout_residual"]["re"].as_f64().unwrap() > 1e-7);
}

#[test]
fn generate_csv_and_shapes() {
    let o = run(&["generate", "--kind", "tetrahedron", "--n", "4", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text.lines().next(), Some("x,y,z"));
    assert_eq!(code(&run(&["generate", "--kind", "tetrahedron", "--n", "5"])), 3);
    let o = run(&["generate", "--kind", "near-degenerate", "--n", "4", "--epsilon", "1e-6"]);
    assert_eq!(code(&o), 0);
}
