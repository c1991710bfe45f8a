//! Command dispatch and report emission.
//!
//! Exit codes: 0 all checks pass, 1 an inequality margin or self-check
//! fails, 2 configuration or parameter error, 3 numerical error.

mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::{
    AxiomsConfig, GroupConfig, GroupName, InequalityConfig, NormConfig, OutputConfig, RunConfig, SweepConfig,
    TrialConfig,
};

use crate::error::{Error, ErrorClass, Result};
use crate::group::{check_group_axioms, check_quasi_norm_axioms, TriangleCheck};
use crate::inequalities::{validate_params, verify, InequalityKind, InequalityParams, VerificationReport};
use crate::quadrature::{polar_consistency_check, sphere_measure, Envelope};
use crate::trials::{estimate_best_constant, param_names, TrialEvaluation};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_MARGIN: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Residual bound for the deterministic axiom checks.
const AXIOM_TOL: f64 = 1e-10;
/// Rounding allowance for the triangle inequality of true norms.
const TRIANGLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Verify,
    Estimate,
    Sweep,
    Axioms,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Estimate => "estimate",
            Command::Sweep => "sweep",
            Command::Axioms => "axioms",
        }
    }
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Estimation { .. } => EXIT_NUMERICAL,
        _ => match err.class() {
            ErrorClass::Input => EXIT_CONFIG,
            ErrorClass::Numerical => EXIT_NUMERICAL,
        },
    }
}

/// Outputs of one command. `report_json` depends only on the resolved
/// config; timing goes to `metadata_json`.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub exit_code: i32,
    pub report_json: String,
    /// File name and contents of the CSV output, if the command has one.
    pub csv: Option<(&'static str, String)>,
    pub metadata_json: String,
}

impl Artifacts {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| Error::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut files = vec![("report.json", &self.report_json), ("metadata.json", &self.metadata_json)];
        if let Some((name, body)) = &self.csv {
            files.push((name, body));
        }
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(io(&path))?;
        }
        Ok(())
    }
}

/// Runs `command` on a resolved config.
pub fn run(command: Command, config: &RunConfig) -> Result<Artifacts> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let (exit_code, body, csv) = match command {
        Command::Verify => run_verify(config)?,
        Command::Estimate => run_estimate(config)?,
        Command::Sweep => run_sweep(config)?,
        Command::Axioms => run_axioms(config)?,
    };
    let mut report = json!({
        "command": command.as_str(),
        "exit_code": exit_code,
        "config": config,
    });
    merge(&mut report, body);
    Ok(Artifacts {
        exit_code,
        report_json: to_pretty(&report),
        csv,
        metadata_json: metadata(command, started, clock),
    })
}

/// Report written when a command fails before producing results.
pub fn error_report(command: Command, config: Option<&RunConfig>, err: &Error) -> String {
    let class = match exit_code(err) {
        EXIT_CONFIG => "configuration",
        _ => "numerical",
    };
    to_pretty(&json!({
        "command": command.as_str(),
        "exit_code": exit_code(err),
        "config": config,
        "error": { "class": class, "message": err.to_string() },
    }))
}

fn merge(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn metadata(command: Command, started: SystemTime, clock: Instant) -> String {
    let unix = started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    to_pretty(&json!({
        "command": command.as_str(),
        "version": env!("CARGO_PKG_VERSION"),
        "started_unix_seconds": unix,
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
        "threads": rayon::current_num_threads(),
    }))
}

type Outcome = (i32, Value, Option<(&'static str, String)>);

fn verdict(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_MARGIN
    }
}

fn run_verify(cfg: &RunConfig) -> Result<Outcome> {
    let norm = cfg.build_norm()?;
    let kind = cfg.inequality()?.name;
    let params = cfg.params(norm.q())?;
    let f = cfg.trial()?.profile()?;
    let h = cfg.second_trial(kind)?.map(TrialConfig::profile).transpose()?;
    let mut body = json!({});
    if kind.uses_bilinear_params() {
        body["admissibility"] = serde_json::to_value(validate_params(&params)).expect("serializable");
    }
    let report = verify(kind, &f, h.as_ref(), &params, &norm, &cfg.quadrature)?;
    body["report"] = serde_json::to_value(report.view()).expect("serializable");
    Ok((verdict(report.pass()), body, None))
}

fn run_estimate(cfg: &RunConfig) -> Result<Outcome> {
    let norm = cfg.build_norm()?;
    let kind = cfg.inequality()?.name;
    let params = cfg.params(norm.q())?;
    let mut families = vec![cfg.trial()?.family()?];
    if let Some(t) = cfg.second_trial(kind)? {
        families.push(t.family()?);
    }
    let est = estimate_best_constant(kind, &params, &families, &cfg.search, &norm, &cfg.quadrature)?;
    let tolerance = 3.0 * est.min_ratio_stderr;
    let pass = est.min_ratio >= est.analytic_constant - tolerance;
    let csv = trace_csv(&param_names(&families), &est.trace)?;
    let body = json!({
        "estimate": {
            "inequality": est.inequality,
            "families": est.families,
            "param_names": est.param_names,
            "min_ratio": est.min_ratio,
            "min_ratio_stderr": est.min_ratio_stderr,
            "argmin": est.argmin,
            "analytic_constant": est.analytic_constant,
            "margin": est.min_ratio - est.analytic_constant,
            "pass": pass,
            "evaluations": est.evaluations,
        }
    });
    Ok((verdict(pass), body, Some(("trace.csv", csv))))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config {
        message: format!("csv encoding failed: {e}"),
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| csv_error(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn trace_csv(names: &[String], trace: &[TrialEvaluation]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["index".to_string(), "restart".to_string()];
    header.extend(names.iter().cloned());
    header.extend(["status", "ratio", "ratio_stderr", "message"].map(String::from));
    w.write_record(&header).map_err(csv_error)?;
    for e in trace {
        let mut row = vec![e.index.to_string(), e.restart.to_string()];
        row.extend(e.params.iter().map(f64::to_string));
        let status = serde_json::to_value(e.status).expect("serializable");
        row.push(status.as_str().unwrap_or_default().to_string());
        row.push(num(e.ratio));
        row.push(num(e.ratio_stderr));
        row.push(e.message.clone().unwrap_or_default());
        w.write_record(&row).map_err(csv_error)?;
    }
    finish_csv(w)
}

/// Fixed column schema of `sweep.csv`.
pub const SWEEP_COLUMNS: [&str; 16] = [
    "inequality",
    "Q",
    "p",
    "q_prime",
    "alpha",
    "beta",
    "lambda_or_gamma",
    "lhs",
    "rhs",
    "ratio",
    "constant",
    "margin",
    "stderr",
    "pass",
    "status",
    "reason",
];

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum RowStatus {
    Pass,
    Fail,
    Skipped,
    Error,
}

#[derive(Clone, Debug, Serialize)]
struct SweepRow {
    params: InequalityParams,
    status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip)]
    report: Option<VerificationReport>,
}

fn sweep_points(cfg: &RunConfig, q_dim: f64) -> Result<Vec<InequalityParams>> {
    let ineq = cfg.inequality()?;
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::Config {
        message: "key `sweep`: section required for this command".into(),
    })?;
    let q_primes: Vec<Option<f64>> = match &sweep.q_prime {
        Some(v) => v.iter().copied().map(Some).collect(),
        None => vec![ineq.q_prime],
    };
    let lambdas: Vec<Option<f64>> = match &sweep.lambda {
        Some(v) => v.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut points = Vec::new();
    for &p in &sweep.p {
        for &qp in &q_primes {
            for &alpha in &sweep.alpha {
                for &beta in &sweep.beta {
                    for &lambda in &lambdas {
                        let qp = qp.unwrap_or(p);
                        points.push(config::point_params(ineq, q_dim, p, qp, alpha, beta, lambda));
                    }
                }
            }
        }
    }
    Ok(points)
}

fn sweep_row(kind: InequalityKind, params: InequalityParams, cfg: &RunConfig) -> Result<SweepRow> {
    let skipped = |reason: String| SweepRow {
        params,
        status: RowStatus::Skipped,
        reason: Some(reason),
        report: None,
    };
    if kind.uses_bilinear_params() {
        let adm = validate_params(&params);
        if !adm.admissible() {
            let names: Vec<String> = adm.failures().iter().map(|c| format!("{} failed", c.name)).collect();
            return Ok(skipped(names.join("; ")));
        }
    }
    let norm = cfg.build_norm()?;
    let f = cfg.trial()?.profile()?;
    let h = cfg.second_trial(kind)?.map(TrialConfig::profile).transpose()?;
    Ok(match verify(kind, &f, h.as_ref(), &params, &norm, &cfg.quadrature) {
        Ok(rep) => SweepRow {
            params,
            status: if rep.pass() { RowStatus::Pass } else { RowStatus::Fail },
            reason: None,
            report: Some(rep),
        },
        Err(e) if e.class() == ErrorClass::Input => skipped(e.to_string()),
        Err(e) => SweepRow {
            params,
            status: RowStatus::Error,
            reason: Some(e.to_string()),
            report: None,
        },
    })
}

fn run_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let norm = cfg.build_norm()?;
    let kind = cfg.inequality()?.name;
    // Profile and family errors concern the whole sweep.
    cfg.trial()?.profile()?;
    cfg.second_trial(kind)?.map(TrialConfig::profile).transpose()?;
    let points = sweep_points(cfg, norm.q())?;
    let rows: Vec<SweepRow> = points
        .into_par_iter()
        .map(|p| sweep_row(kind, p, cfg))
        .collect::<Result<_>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS).map_err(csv_error)?;
    let mut json_rows = Vec::with_capacity(rows.len());
    let (mut passed, mut failed, mut skipped, mut errors) = (0, 0, 0, 0);
    for row in &rows {
        match row.status {
            RowStatus::Pass => passed += 1,
            RowStatus::Fail => failed += 1,
            RowStatus::Skipped => skipped += 1,
            RowStatus::Error => errors += 1,
        }
        w.write_record(csv_row(kind, row)).map_err(csv_error)?;
        let mut v = serde_json::to_value(row).expect("serializable");
        if let Some(rep) = &row.report {
            v["report"] = serde_json::to_value(rep.view()).expect("serializable");
        }
        json_rows.push(v);
    }
    let exit = if errors > 0 {
        EXIT_NUMERICAL
    } else if failed > 0 {
        EXIT_MARGIN
    } else {
        EXIT_PASS
    };
    let body = json!({
        "summary": { "points": rows.len(), "passed": passed, "failed": failed, "skipped": skipped, "errors": errors },
        "rows": json_rows,
    });
    Ok((exit, body, Some(("sweep.csv", finish_csv(w)?))))
}

fn csv_row(kind: InequalityKind, row: &SweepRow) -> Vec<String> {
    let p = &row.params;
    let status = serde_json::to_value(&row.status).expect("serializable");
    let reason = row.reason.clone().unwrap_or_default();
    let status = status.as_str().unwrap_or_default().to_string();
    match &row.report {
        Some(rep) => {
            let rp = &rep.params;
            vec![
                kind.to_string(),
                rp.q_dim.to_string(),
                rp.p.to_string(),
                num(rp.q_prime),
                num(rp.alpha),
                num(rp.beta),
                num(rp.lambda_or_gamma()),
                rep.lhs.to_string(),
                rep.rhs.to_string(),
                rep.ratio.to_string(),
                rep.analytic_constant.to_string(),
                rep.margin().to_string(),
                rep.combined_stderr().to_string(),
                rep.pass().to_string(),
                status,
                reason,
            ]
        }
        None => {
            let (q_prime, alpha, beta, lg) = match kind {
                k if k.uses_bilinear_params() => (Some(p.q_prime), Some(p.alpha), Some(p.beta), Some(p.lambda)),
                InequalityKind::ReverseCkn | InequalityKind::ForwardCkn => {
                    (None, Some(p.alpha), Some(p.beta), Some(p.gamma()))
                }
                _ => (None, None, None, None),
            };
            let mut out = vec![
                kind.to_string(),
                p.q_dim.to_string(),
                p.p.to_string(),
                num(q_prime),
                num(alpha),
                num(beta),
                num(lg),
            ];
            out.extend(std::iter::repeat_n(String::new(), 7));
            out.push(status);
            out.push(reason);
            out
        }
    }
}

fn run_axioms(cfg: &RunConfig) -> Result<Outcome> {
    let norm = cfg.build_norm()?;
    let n = cfg.axioms.samples;
    let seed = cfg.quadrature.seed;
    let group = check_group_axioms(norm.group(), n, seed);
    let norm_rep = check_quasi_norm_axioms(&norm, n, seed);
    let sphere = sphere_measure(&norm, &cfg.quadrature)?;
    let polar = polar_consistency_check(&norm, |r| (-r).exp(), &Envelope::exponential(1.0), &cfg.quadrature)?;

    let mut checks = vec![
        check("group axioms", group.max_residual(), AXIOM_TOL),
        check("norm homogeneity", norm_rep.homogeneity_max_rel, AXIOM_TOL),
        check("norm symmetry", norm_rep.symmetry_max_rel, AXIOM_TOL),
        json!({ "name": "norm definiteness", "pass": norm_rep.vanishes_at_origin && norm_rep.positive_off_origin }),
        json!({
            "name": "polar consistency",
            "value": polar.relative_discrepancy,
            "pass": polar.consistent,
        }),
    ];
    if let TriangleCheck::Checked { max_excess } = norm_rep.triangle {
        checks.push(check("triangle inequality", max_excess, TRIANGLE_TOL));
    }
    let pass = checks.iter().all(|c| c["pass"] == Value::Bool(true));
    let body = json!({
        "checks": checks,
        "group_axioms": group,
        "norm_axioms": norm_rep,
        "sphere_measure": sphere,
        "polar_consistency": polar,
    });
    Ok((verdict(pass), body, None))
}

fn check(name: &str, value: f64, tolerance: f64) -> Value {
    json!({ "name": name, "value": value, "tolerance": tolerance, "pass": value <= tolerance })
}

#[derive(Debug, Parser)]
#[command(name = "revineq", about = "Numerical verification of reverse integral inequalities on homogeneous groups")]
struct Cli {
    /// TOML run configuration (JSON if the name ends in .json).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    command: Command,
    /// Overrides every seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to `output.dir` of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let config = RunConfig::load(&cli.config).and_then(|c| c.resolve(cli.seed));
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(dir) = &cli.out {
                let art = Artifacts {
                    exit_code: exit_code(&e),
                    report_json: error_report(cli.command, None, &e),
                    csv: None,
                    metadata_json: metadata(cli.command, SystemTime::now(), Instant::now()),
                };
                if let Err(w) = art.write(dir) {
                    eprintln!("error: {w}");
                }
            }
            return exit_code(&e);
        }
    };
    let dir = cli.out.clone().unwrap_or_else(|| config.output.dir.clone());
    let artifacts = run(cli.command, &config).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        Artifacts {
            exit_code: exit_code(&e),
            report_json: error_report(cli.command, Some(&config), &e),
            csv: None,
            metadata_json: metadata(cli.command, SystemTime::now(), Instant::now()),
        }
    });
    if let Err(e) = artifacts.write(&dir) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    println!("{}: exit {} ({})", cli.command.as_str(), artifacts.exit_code, dir.join("report.json").display());
    artifacts.exit_code
}
