//! Text summaries and table rows for each subcommand.

use crate::table::{Cell, RowContext, TableArtifact};
use std::io::{self, Write};
use trobust::estimators::{FitResult, NuEstimationResult};
use trobust::sim::MetricsReport;
use trobust::{Dataset, Dof};

const REAL_DATA: &str = "real-data";

fn column_names(data: &Dataset) -> Vec<String> {
    let names = data.column_names();
    if names.len() == data.p() {
        names.to_vec()
    } else {
        (1..=data.p()).map(|j| format!("x{j}")).collect()
    }
}

fn nu_value(dof: Dof) -> Cell {
    Cell(dof.nu())
}

fn fmt_cell(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:.6}"),
        _ => "NA".into(),
    }
}

fn fmt_dof(dof: Dof) -> String {
    match dof {
        Dof::Finite(nu) => format!("{nu:.6}"),
        Dof::Gaussian => "inf (Gaussian limit)".into(),
    }
}

pub fn print_fit<W: Write>(w: &mut W, data: &Dataset, method: &str, fit: &FitResult) -> io::Result<()> {
    writeln!(w, "method {method}, n = {}, p = {}", data.n(), data.p())?;
    writeln!(w, "{:<16} {:>14} {:>14}", "term", "estimate", "std.error")?;
    let se = |j: usize| fit.std_errors.as_ref().and_then(|s| s.get(j).copied());
    for (j, (name, b)) in column_names(data).iter().zip(&fit.beta).enumerate() {
        writeln!(w, "{name:<16} {:>14} {:>14}", fmt_cell(Some(*b)), fmt_cell(se(j)))?;
    }
    writeln!(w, "{:<16} {:>14} {:>14}", "sigma", fmt_cell(Some(fit.sigma)), fmt_cell(se(data.p())))?;
    let wald = fit.nu_estimate.as_ref().and_then(|e| e.wald_se);
    match wald {
        Some(s) => writeln!(w, "nu               {} (Wald SE {s:.6})", fmt_dof(fit.nu_used))?,
        None => writeln!(w, "nu               {}", fmt_dof(fit.nu_used))?,
    }
    if let Some(est) = &fit.nu_estimate {
        writeln!(w, "flatness         {} (statistic {:.4})", est.flatness_detected, est.flatness_statistic)?;
    }
    writeln!(w, "log-likelihood   {}", fmt_cell(fit.loglik))?;
    for warning in &fit.diagnostics.warnings {
        writeln!(w, "warning: {warning}")?;
    }
    Ok(())
}

pub fn fit_table(data: &Dataset, method: &str, fit: &FitResult) -> TableArtifact {
    let ctx = RowContext { n: data.n(), p: data.p(), nu_true: REAL_DATA.into() };
    let diag = fit.diagnostics.warnings.join("; ");
    let se = |j: usize| Cell(fit.std_errors.as_ref().and_then(|s| s.get(j).copied()));
    let mut t = TableArtifact::default();
    for (j, (name, b)) in column_names(data).iter().zip(&fit.beta).enumerate() {
        t.push(method, &format!("beta[{name}]"), Cell::of(*b), &ctx, &diag);
        t.push(method, &format!("se[{name}]"), se(j), &ctx, &diag);
    }
    t.push(method, "sigma", Cell::of(fit.sigma), &ctx, &diag);
    t.push(method, "se[sigma]", se(data.p()), &ctx, &diag);
    t.push(method, "nu", nu_value(fit.nu_used), &ctx, &diag);
    t.push(method, "nu_wald_se", Cell(fit.nu_estimate.as_ref().and_then(|e| e.wald_se)), &ctx, &diag);
    t.push(method, "loglik", Cell(fit.loglik), &ctx, &diag);
    t
}

fn nu_diagnostics(r: &NuEstimationResult) -> String {
    let mut d = Vec::new();
    if r.flatness_detected {
        d.push("flat likelihood");
    }
    if r.nu_hat.is_gaussian() {
        d.push("gaussian limit");
    }
    if !r.converged {
        d.push("not converged");
    }
    d.join("; ")
}

pub fn print_nu<W: Write>(w: &mut W, data: &Dataset, results: &[NuEstimationResult]) -> io::Result<()> {
    writeln!(w, "n = {}, p = {}", data.n(), data.p())?;
    writeln!(w, "{:<10} {:>22} {:>12} {:>12} {:>14}  notes", "method", "nu_hat", "wald_se", "omega_hat", "objective")?;
    for r in results {
        writeln!(
            w,
            "{:<10} {:>22} {:>12} {:>12.6} {:>14.6}  {}",
            r.method.label(),
            fmt_dof(r.nu_hat),
            fmt_cell(r.wald_se),
            r.omega_hat,
            r.objective_value,
            nu_diagnostics(r)
        )?;
    }
    Ok(())
}

pub fn nu_table(data: &Dataset, results: &[NuEstimationResult]) -> TableArtifact {
    let ctx = RowContext { n: data.n(), p: data.p(), nu_true: REAL_DATA.into() };
    let mut t = TableArtifact::default();
    for r in results {
        let (m, d) = (r.method.label(), nu_diagnostics(r));
        t.push(&m, "nu_hat", nu_value(r.nu_hat), &ctx, &d);
        t.push(&m, "nu_wald_se", Cell(r.wald_se), &ctx, &d);
        t.push(&m, "omega_hat", Cell::of(r.omega_hat), &ctx, &d);
        t.push(&m, "objective", Cell::of(r.objective_value), &ctx, &d);
        t.push(&m, "flatness_statistic", Cell::of(r.flatness_statistic), &ctx, &d);
    }
    t
}

pub fn print_study<W: Write>(w: &mut W, r: &MetricsReport) -> io::Result<()> {
    let nu_true = r.nu_true.map_or_else(|| "none".to_string(), |v| v.to_string());
    writeln!(
        w,
        "{}: n = {}, p = {}, true nu = {nu_true}, {} replications, {:.1} s on {} thread(s)",
        r.name, r.n, r.p, r.replications, r.metadata.elapsed_seconds, r.metadata.threads
    )?;
    writeln!(
        w,
        "{:<12} {:>10} {:>10} {:>10} {:>10} {:>5} {:>5} {:>5} {:>7}",
        "method", "rmse_beta", "rmse_nu", "bias_nu", "se_nu", "ok", "fail", "flat", "capped"
    )?;
    for m in &r.methods {
        let nu = m.nu.as_ref();
        let f = |v: Option<f64>| match v {
            Some(v) if v.is_finite() => format!("{v:.4}"),
            _ => "NA".into(),
        };
        writeln!(
            w,
            "{:<12} {:>10} {:>10} {:>10} {:>10} {:>5} {:>5} {:>5} {:>7}",
            m.method,
            f(m.rmse_beta),
            f(nu.and_then(|n| n.rmse)),
            f(nu.and_then(|n| n.bias)),
            f(nu.and_then(|n| n.se)),
            m.successes,
            m.failures,
            m.flat,
            m.gaussian_markers
        )?;
    }
    Ok(())
}

pub fn study_table(r: &MetricsReport) -> TableArtifact {
    let nu_true = r.nu_true.map_or_else(|| "gaussian".to_string(), |v| v.to_string());
    let ctx = RowContext { n: r.n, p: r.p, nu_true };
    let mut t = TableArtifact::default();
    for m in &r.methods {
        let d = format!(
            "replications {}; success {}; failure {}; flat {}; gaussian markers {}",
            r.replications, m.successes, m.failures, m.flat, m.gaussian_markers
        );
        let count = |v: usize| Cell(Some(v as f64));
        t.push(&m.method, "rmse_beta", Cell(m.rmse_beta), &ctx, &d);
        t.push(&m.method, "beta_count", count(m.beta_count), &ctx, &d);
        for (prefix, metrics) in [("nu", &m.nu), ("nu_finite", &m.nu_finite)] {
            if let Some(n) = metrics {
                t.push(&m.method, &format!("{prefix}_rmse"), Cell(n.rmse), &ctx, &d);
                t.push(&m.method, &format!("{prefix}_bias"), Cell(n.bias), &ctx, &d);
                t.push(&m.method, &format!("{prefix}_se"), Cell(n.se), &ctx, &d);
                t.push(&m.method, &format!("{prefix}_count"), count(n.count), &ctx, &d);
            }
        }
        t.push(&m.method, "successes", count(m.successes), &ctx, &d);
        t.push(&m.method, "failures", count(m.failures), &ctx, &d);
        t.push(&m.method, "flat", count(m.flat), &ctx, &d);
        t.push(&m.method, "gaussian_markers", count(m.gaussian_markers), &ctx, &d);
    }
    t
}
