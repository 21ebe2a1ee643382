//! Certificate reports and the text tables printed by the CLI.

use std::fmt::Write as _;

use feasik_core::certificates::{self, ReproductionReport};
use feasik_core::{RunConfig, RunResult, RunStatus, Solver};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct DescentSummary {
    pub z: Vec<f64>,
    #[serde(rename = "R")]
    pub radius: f64,
    pub lambda: f64,
    pub applicable_steps: usize,
    pub min_slack: Option<f64>,
    pub violations: Vec<u64>,
    pub k: Vec<u64>,
    pub slack: Vec<f64>,
    pub applicable: Vec<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InteriorSummary {
    pub samples: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub status: String,
    pub k_feasible: Option<u64>,
    pub corrections: u64,
    pub descent: DescentSummary,
    pub fixed_point_violations: Vec<u64>,
    pub interior: InteriorSummary,
    pub passed: bool,
}

pub fn status_text(status: RunStatus) -> &'static str {
    match status {
        RunStatus::FeasibleAt(_) => "feasible",
        RunStatus::MaxIterExceeded => "max_iter_exceeded",
    }
}

pub fn summary_line(res: &RunResult) -> String {
    format!(
        "status={} k_feasible={} corrections={}",
        status_text(res.status),
        res.k_feasible().map_or_else(|| "none".to_string(), |k| k.to_string()),
        res.corrections
    )
}

/// Solves and checks the descent inequality against the document's interior
/// ball, plus the fixed-point characterization and an interior spot check.
pub fn certify(cfg: RunConfig, samples: usize, seed: u64) -> anyhow::Result<(RunResult, CertificateReport)> {
    let interior = cfg
        .problem
        .interior()
        .cloned()
        .ok_or_else(|| anyhow::anyhow!("certify needs an `interior` section with z and R"))?;
    let lambda = cfg.weights.floor(cfg.control.max_card());
    let problem = cfg.problem.clone();
    let window = cfg.feas_window.clone();
    let res = Solver::new(cfg)?.solve()?;
    let cert = certificates::check_descent(&res, problem.outer(), &interior.z, interior.radius, lambda)?;
    let fixed = certificates::check_fixed_points(&res, &problem)?;
    let spot = problem.spot_check_interior(&window, samples, seed)?;
    let passed = cert.violations.is_empty() && fixed.is_empty() && spot.passed();
    let report = CertificateReport {
        status: status_text(res.status).to_string(),
        k_feasible: res.k_feasible(),
        corrections: res.corrections,
        descent: DescentSummary {
            z: interior.z.as_slice().to_vec(),
            radius: interior.radius,
            lambda,
            applicable_steps: cert.applicable_steps(),
            min_slack: cert.min_slack(),
            violations: cert.violations.clone(),
            k: cert.entries.iter().map(|e| e.k).collect(),
            slack: cert.entries.iter().map(|e| e.slack).collect(),
            applicable: cert.entries.iter().map(|e| e.applicable).collect(),
        },
        fixed_point_violations: fixed,
        interior: InteriorSummary {
            samples: spot.samples,
            failures: spot.failures.len(),
        },
        passed,
    };
    Ok((res, report))
}

pub fn render_certificate(report: &CertificateReport) -> String {
    let mut s = String::new();
    let d = &report.descent;
    let _ = writeln!(s, "status             {}", report.status);
    let _ = writeln!(s, "k_feasible         {}", report.k_feasible.map_or("none".into(), |k| k.to_string()));
    let _ = writeln!(s, "descent steps      {} applicable of {}", d.applicable_steps, d.k.len());
    let _ = writeln!(s, "min slack          {}", d.min_slack.map_or("-".into(), |v| format!("{v:e}")));
    let _ = writeln!(s, "descent violations {}", d.violations.len());
    let _ = writeln!(s, "fixed-point issues {}", report.fixed_point_violations.len());
    let _ = writeln!(s, "interior failures  {} of {} samples", report.interior.failures, report.interior.samples);
    let _ = writeln!(s, "result             {}", if report.passed { "PASS" } else { "FAIL" });
    s
}

/// Table of the first `rows` oracle comparisons followed by the named checks.
pub fn render_reproduction(rep: &ReproductionReport, rows: usize) -> String {
    let mut s = String::new();
    match rep.name {
        "a1" => {
            let _ = writeln!(s, "{:>4} {:>24} {:>24} {:>10}", "k", "y_2k engine", "2^-2k", "rel_err");
        }
        _ => {
            let _ = writeln!(s, "{:>4} {:>14} {:>24} {:>24} {:>10}", "k", "n_k", "x at n_k", "1+sqrt(2 b_k)", "rel_err");
        }
    }
    for row in rep.rows.iter().take(rows) {
        if rep.name == "a1" {
            let _ = writeln!(s, "{:>4} {:>24?} {:>24?} {:>10.1e}", row.k, row.engine, row.oracle, row.rel_err);
        } else {
            let pos = if row.position == u64::MAX { ">2^62".to_string() } else { row.position.to_string() };
            let _ = writeln!(s, "{:>4} {:>14} {:>24?} {:>24?} {:>10.1e}", row.k, pos, row.engine, row.oracle, row.rel_err);
        }
    }
    let _ = writeln!(s, "max rel_err {:e} (tolerance {:e}), {} steps, status {}", rep.max_rel_err, rep.tolerance, rep.steps, status_text(rep.status));
    for (name, ok) in &rep.checks {
        let _ = writeln!(s, "{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
    for note in &rep.notes {
        let _ = writeln!(s, "note: {note}");
    }
    s
}
