use anyhow::anyhow;
use chemosteady_core::diagnostics::{
    check_alpha_monotonicity, check_mass_round_trip, check_w_sandwich, consumption_barrier, CheckResult, Status,
};
use chemosteady_core::domain::Grid;
use chemosteady_core::mass::{steady_state, Target};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::failure::{Classify, Failure};
use crate::output::{write_json, write_text};
use crate::Common;

#[derive(Debug, Serialize)]
struct Row {
    gamma: f64,
    g_scale: f64,
    /// The `α` (or pair/chain of them) the check was run at.
    at: String,
    check: CheckResult,
}

#[derive(Debug, Serialize)]
struct SuiteSummary<'a> {
    lattice_points: usize,
    checks: usize,
    failed: usize,
    skipped: usize,
    all_passed: bool,
    rows: &'a [Row],
}

fn lattice_point(cfg: &RunConfig, grid: &Grid, alphas: &[f64], gamma: f64, g_scale: f64) -> Result<Vec<Row>, Failure> {
    let boundary = cfg.boundary_with(grid, gamma, g_scale).config()?;
    let settings = cfg.settings();
    let row = |at: String, check: CheckResult| Row { gamma, g_scale, at, check };
    let mut rows = Vec::new();
    let mut fields = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let state = steady_state(grid.clone(), boundary.clone(), Target::Alpha(alpha), &settings).solver()?;
        rows.extend(state.report.checks.iter().map(|c| row(alpha.to_string(), c.clone())));
        rows.push(row(
            alpha.to_string(),
            check_mass_round_trip(grid, &boundary, alpha, &settings.scalar, settings.mass_tol),
        ));
        fields.push(state.c);
    }
    let barrier = consumption_barrier(grid, &boundary).solver()?;
    for k in 1..alphas.len() {
        let check = check_w_sandwich(&barrier, (alphas[k - 1], &fields[k - 1]), (alphas[k], &fields[k]));
        rows.push(row(format!("{}..{}", alphas[k - 1], alphas[k]), check));
    }
    let chain: Vec<String> = alphas.iter().map(|a| a.to_string()).collect();
    rows.push(row(
        chain.join(","),
        check_alpha_monotonicity(grid, &boundary, alphas, &settings.scalar),
    ));
    Ok(rows)
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Passed => "passed",
        Status::Failed => "failed",
        Status::Skipped => "skipped",
    }
}

pub fn run(args: &Common) -> Result<bool, Failure> {
    let cfg = RunConfig::load(&args.config).config()?;
    let lattice = cfg
        .propsuite
        .clone()
        .ok_or_else(|| Failure::Config(anyhow!("propsuite needs a [propsuite] block with an alpha list")))?;
    let grid = cfg.grid().config()?;
    let gammas = lattice.gamma.clone().unwrap_or_else(|| vec![cfg.physics.gamma]);
    let points: Vec<(f64, f64)> = gammas
        .iter()
        .flat_map(|&g| lattice.g_scale.iter().map(move |&s| (g, s)))
        .collect();

    // collect preserves lattice order regardless of scheduling
    let per_point: Vec<Result<Vec<Row>, Failure>> = points
        .par_iter()
        .map(|&(gamma, scale)| lattice_point(&cfg, &grid, &lattice.alpha, gamma, scale))
        .collect();
    let mut rows = Vec::new();
    for r in per_point {
        rows.extend(r?);
    }

    let mut table = String::from("gamma\tg_scale\talpha\tcheck\tstatus\tworst_violation\ttolerance\n");
    for r in &rows {
        table.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{:e}\t{:e}\n",
            r.gamma,
            r.g_scale,
            r.at,
            r.check.name,
            status_name(r.check.status),
            r.check.worst_violation,
            r.check.tolerance
        ));
    }
    let failed = rows.iter().filter(|r| r.check.status == Status::Failed).count();
    let skipped = rows.iter().filter(|r| r.check.status == Status::Skipped).count();
    let summary = SuiteSummary {
        lattice_points: points.len(),
        checks: rows.len(),
        failed,
        skipped,
        all_passed: failed == 0,
        rows: &rows,
    };
    write_text(&args.out.join("propsuite.tsv"), &table).solver()?;
    write_json(&args.out.join("propsuite.json"), &summary).solver()?;
    if !args.quiet {
        println!(
            "{} lattice points, {} checks: {} failed, {} skipped",
            points.len(),
            rows.len(),
            failed,
            skipped
        );
    }
    for r in rows.iter().filter(|r| r.check.status == Status::Failed) {
        eprintln!(
            "check failed: {} at gamma = {}, g_scale = {}, alpha = {}: {}",
            r.check.name, r.gamma, r.g_scale, r.at, r.check.detail
        );
    }
    Ok(failed == 0)
}
