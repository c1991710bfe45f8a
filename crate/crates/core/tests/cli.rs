use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_revineq");

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

struct Run {
    code: i32,
    stderr: String,
    dir: tempfile::TempDir,
}

impl Run {
    fn report(&self) -> Value {
        serde_json::from_str(&self.text("report.json")).unwrap()
    }

    fn text(&self, name: &str) -> String {
        std::fs::read_to_string(self.dir.path().join(name)).unwrap()
    }
}

fn run(config: &Path, command: &str, extra: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .arg("--config")
        .arg(config)
        .args(["--command", command, "--out"])
        .arg(dir.path())
        .args(extra)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        dir,
    }
}

fn run_text(toml: &str, command: &str) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.toml");
    std::fs::write(&path, toml).unwrap();
    let r = run(&path, command, &[]);
    drop(dir);
    r
}

#[test]
fn verify_reverse_hardy_passes() {
    let r = run(&shipped("reverse_hardy.toml"), "verify", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.report();
    assert!((v["report"]["ratio"].as_f64().unwrap() - 0.15340).abs() < 1e-5);
    assert!((v["report"]["analytic_constant"].as_f64().unwrap() - 0.142857).abs() < 1e-6);
    assert_eq!(v["report"]["pass"], true);
    assert_eq!(v["exit_code"], 0);
    assert_eq!(v["config"]["inequality"]["name"], "reverse_hardy");
    assert!(v["report"]["sphere_measure"].as_f64().is_some());
    let meta: Value = serde_json::from_str(&r.text("metadata.json")).unwrap();
    assert!(meta["elapsed_seconds"].as_f64().is_some() && meta["started_unix_seconds"].as_f64().is_some());
    assert!(!r.text("report.json").contains("elapsed"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for (cfg, cmd) in [("reverse_hardy.toml", "verify"), ("stein_weiss.toml", "verify"), ("sweep_stein_weiss.toml", "sweep")] {
        let a = run(&shipped(cfg), cmd, &["--seed", "3"]);
        let b = run(&shipped(cfg), cmd, &["--seed", "3"]);
        assert_eq!(a.code, b.code);
        assert_eq!(a.text("report.json"), b.text("report.json"), "{cfg}");
    }
}

#[test]
fn seed_flag_overrides_the_config() {
    let a = run(&shipped("stein_weiss.toml"), "verify", &["--seed", "1"]);
    let b = run(&shipped("stein_weiss.toml"), "verify", &["--seed", "2"]);
    assert_eq!(a.report()["config"]["quadrature"]["seed"], 1);
    assert_eq!(b.report()["config"]["quadrature"]["seed"], 2);
    assert_ne!(a.report()["report"]["lhs"], b.report()["report"]["lhs"]);
}

#[test]
fn unknown_key_exits_2_with_its_path() {
    let toml = "[group]\nname = \"heisenberg\"\nn = 1\n\n[inequality]\nname = \"reverse_hardy\"\np = 0.5\nbogus = 1\n";
    let r = run_text(toml, "verify");
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("inequality.bogus") && r.stderr.contains("line 8"), "{}", r.stderr);
    let v = r.report();
    assert_eq!(v["error"]["class"], "configuration");
}

#[test]
fn out_of_range_parameter_exits_2() {
    let toml = "[group]\nname = \"heisenberg\"\nn = 1\n\n[inequality]\nname = \"reverse_hardy\"\np = 1.5\n\n[trial]\nfamily = \"exp_decay\"\n";
    let r = run_text(toml, "verify");
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.report()["error"]["message"].as_str().unwrap().contains("inequalities"));
}

const INTEGRAL_HARDY: &str = "[group]\nname = \"heisenberg\"\nn = 1\n\n[inequality]\nname = \"NAME\"\np = 0.5\nq_prime = 0.5\nalpha = ALPHA\n\n[trial]\nfamily = \"exp_decay\"\n";

#[test]
fn failing_margin_exits_1() {
    let toml = INTEGRAL_HARDY.replace("NAME", "reverse_integral_hardy_ball").replace("ALPHA", "2.0");
    let r = run_text(&toml, "verify");
    assert_eq!(r.code, 1, "{}", r.stderr);
    let v = r.report();
    assert_eq!(v["report"]["pass"], false);
    assert_eq!(v["report"]["lhs"], 0.0);
}

#[test]
fn divergence_exits_3() {
    let toml = INTEGRAL_HARDY.replace("NAME", "reverse_integral_hardy_complement").replace("ALPHA", "0.0");
    let r = run_text(&toml, "verify");
    assert_eq!(r.code, 3, "{}", r.stderr);
    let v = r.report();
    assert_eq!(v["error"]["class"], "numerical");
    assert!(v["error"]["message"].as_str().unwrap().contains("verify_reverse_integral_hardy"));
}

#[test]
fn sweep_skips_unbalanced_points_with_a_reason() {
    let r = run(&shipped("sweep_stein_weiss.toml"), "sweep", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut rd = csv::Reader::from_path(r.dir.path().join("sweep.csv")).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(
        header,
        [
            "inequality", "Q", "p", "q_prime", "alpha", "beta", "lambda_or_gamma", "lhs", "rhs", "ratio", "constant", "margin",
            "stderr", "pass", "status", "reason"
        ]
    );
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3 * 2 * 2);
    let skipped: Vec<_> = rows.iter().filter(|r| &r[14] == "skipped").collect();
    assert!(!skipped.is_empty());
    for row in &skipped {
        assert!(row[15].contains("balance condition failed"), "{row:?}");
        assert_eq!(&row[13], "");
    }
    // p = 0.5, q' = 0.5, alpha = 0: balance gives lambda = 4 in the plane
    assert!(rows.iter().any(|r| &r[2] == "0.5" && &r[4] == "0" && &r[6] == "4" && &r[14] == "pass" && &r[13] == "true"));
}

#[test]
fn estimate_writes_a_trace() {
    let r = run(&shipped("estimate_sobolev.toml"), "estimate", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.report();
    let min = v["estimate"]["min_ratio"].as_f64().unwrap();
    assert!(min >= 0.125 - 1e-9 && min < 0.13304, "{min}");
    let mut rd = csv::Reader::from_path(r.dir.path().join("trace.csv")).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header, ["index", "restart", "s", "status", "ratio", "ratio_stderr", "message"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 40);
    for row in &rows {
        if let Ok(ratio) = row[4].parse::<f64>() {
            assert!(min <= ratio);
        }
    }
}

#[test]
fn axioms_pass_for_every_shipped_group() {
    let r = run(&shipped("axioms_cygan.toml"), "axioms", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let toml = "[group]\nname = \"graded\"\nweights = [1, 2, \"3/2\"]\n\n[quadrature]\nscheme = \"tensor_grid\"\nnodes_per_axis = 16\n";
    let r = run_text(toml, "axioms");
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn missing_config_file_exits_2() {
    let r = run(Path::new("/nonexistent/config.toml"), "verify", &[]);
    assert_eq!(r.code, 2);
}
