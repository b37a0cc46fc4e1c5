use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use chemosteady_core::diagnostics::CheckReport;
use chemosteady_core::domain::{DomainKind, Grid, ScalarField};
use chemosteady_core::mass::SteadyState;
use serde::Serialize;

/// Coordinate column names for a grid.
pub fn coordinate_names(grid: &Grid) -> &'static [&'static str] {
    match grid.domain().kind() {
        DomainKind::Interval { .. } => &["x"],
        DomainKind::RadialBall { .. } => &["r"],
        DomainKind::Rectangle { .. } => &["x", "y"],
    }
}

/// Tab-separated node table: coordinates followed by the named fields.
pub fn field_table(grid: &Grid, columns: &[(&str, &ScalarField)]) -> String {
    let coords = coordinate_names(grid);
    let mut out = String::new();
    let header: Vec<&str> = coords.iter().copied().chain(columns.iter().map(|c| c.0)).collect();
    out.push_str(&header.join("\t"));
    out.push('\n');
    for (i, p) in grid.nodes().iter().enumerate() {
        let mut row: Vec<String> = p[..coords.len()].iter().map(|v| v.to_string()).collect();
        row.extend(columns.iter().map(|c| c.1[i].to_string()));
        let _ = writeln!(out, "{}", row.join("\t"));
    }
    out
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub domain: String,
    pub resolution: usize,
    pub nodes: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub mass: f64,
    pub mass_target: Option<f64>,
    pub mass_tol: f64,
    pub dmass_dalpha: Option<f64>,
    pub c_min: f64,
    pub c_max: f64,
    pub n_min: f64,
    pub n_max: f64,
    pub picard_iterations: usize,
    pub newton_iterations: usize,
    pub pde_residual: f64,
    pub bc_residual: f64,
    pub n_residual: f64,
    pub all_passed: bool,
    pub report: &'a CheckReport,
}

impl<'a> Summary<'a> {
    pub fn new(state: &'a SteadyState, resolution: usize) -> Self {
        Self {
            domain: describe(&state.grid),
            resolution,
            nodes: state.grid.len(),
            gamma: state.boundary.gamma(),
            alpha: state.alpha,
            mass: state.mass_achieved,
            mass_target: state.mass_target,
            mass_tol: state.mass_tol,
            dmass_dalpha: state.dmass,
            c_min: state.c.min(),
            c_max: state.c.max(),
            n_min: state.n.min(),
            n_max: state.n.max(),
            picard_iterations: state.solution.picard_iterations,
            newton_iterations: state.solution.newton_iterations,
            pde_residual: state.solution.pde_residual,
            bc_residual: state.solution.bc_residual,
            n_residual: state.n_residual,
            all_passed: state.report.all_passed(),
            report: &state.report,
        }
    }
}

pub fn describe(grid: &Grid) -> String {
    match grid.domain().kind() {
        DomainKind::Interval { length } => format!("interval(length={length})"),
        DomainKind::RadialBall { dimension, radius } => format!("ball(dimension={dimension}, radius={radius})"),
        DomainKind::Rectangle { lx, ly } => format!("rectangle(lx={lx}, ly={ly})"),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chemosteady_core::domain::{build_grid, DomainSpec};

    #[test]
    fn rectangle_table_has_two_coordinates() {
        let grid = build_grid(DomainSpec::rectangle(1.0, 1.0).unwrap(), 9).unwrap();
        let c = ScalarField::constant(&grid, 0.5);
        let text = field_table(&grid, &[("c", &c)]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x\ty\tc"));
        assert_eq!(lines.count(), 81);
    }
}
