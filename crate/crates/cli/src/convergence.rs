use anyhow::anyhow;
use chemosteady_core::domain::{BoundaryData, DomainKind, Grid, ScalarField};
use chemosteady_core::mass::steady_state;
use chemosteady_core::oracle::solve_oracle;

use crate::config::RunConfig;
use crate::failure::{Classify, Failure};
use crate::output::write_text;
use crate::Common;

struct Level {
    resolution: usize,
    spacing: f64,
    alpha: f64,
    mass: f64,
    c: ScalarField,
    /// `c` restricted to the coarsest grid's nodes.
    coarse_c: Vec<f64>,
    passed: bool,
    oracle_error: Option<f64>,
}

/// Centre and half-length of a symmetric one-dimensional problem, when the
/// oracle applies.
fn symmetric_reduction(grid: &Grid, boundary: &BoundaryData) -> Option<(f64, f64)> {
    boundary.constant_g()?;
    match grid.domain().kind() {
        DomainKind::Interval { length } => Some((0.5 * length, 0.5 * length)),
        DomainKind::RadialBall { dimension: 1, radius } => Some((0.0, radius)),
        _ => None,
    }
}

fn restrict(grid: &Grid, c: &ScalarField, coarse_shape: [usize; 2], stride: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(coarse_shape[0] * coarse_shape[1]);
    for j in 0..coarse_shape[1] {
        for i in 0..coarse_shape[0] {
            out.push(c[grid.index(i * stride, j * stride)]);
        }
    }
    out
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

pub fn run(args: &Common, levels: usize) -> Result<bool, Failure> {
    if levels == 0 {
        return Err(Failure::Config(anyhow!("--levels must be at least 1")));
    }
    let cfg = RunConfig::load(&args.config).config()?;
    let target = cfg.target().config()?;
    let mut grid = cfg.grid().config()?;
    let coarse_shape = grid.shape();
    let mut results: Vec<Level> = Vec::with_capacity(levels);
    for k in 0..levels {
        if k > 0 {
            grid = grid.refined().config()?;
        }
        let boundary = cfg.boundary(&grid).config()?;
        let oracle_geometry = symmetric_reduction(&grid, &boundary);
        let state = steady_state(grid.clone(), boundary, target, &cfg.settings()).solver()?;
        let oracle_error = match oracle_geometry {
            Some((centre, half)) => {
                let g = state.boundary.constant_g().expect("constant g");
                let profile = solve_oracle(half, g, state.boundary.gamma(), state.alpha).solver()?;
                let mut err: f64 = 0.0;
                for (i, p) in grid.nodes().iter().enumerate() {
                    let exact = profile.sample((p[0] - centre).abs()).solver()?;
                    err = err.max((state.c[i] - exact).abs());
                }
                Some(err)
            }
            None => None,
        };
        results.push(Level {
            resolution: grid.shape()[0],
            spacing: grid.spacing()[0],
            alpha: state.alpha,
            mass: state.mass_achieved,
            coarse_c: restrict(&grid, &state.c, coarse_shape, 1 << k),
            c: state.c,
            passed: state.report.all_passed(),
            oracle_error,
        });
    }

    let mut table = String::from("level\tresolution\th\talpha\tmass\tc_min\tc_max\tdelta\torder\toracle_error\n");
    for (k, level) in results.iter().enumerate() {
        let delta = (k >= 1).then(|| sup_diff(&level.coarse_c, &results[k - 1].coarse_c));
        // Richardson estimate from the triplet ending at this level
        let order = (k >= 2).then(|| {
            let prev = sup_diff(&results[k - 1].coarse_c, &results[k - 2].coarse_c);
            (prev / delta.expect("k >= 1")).log2()
        });
        table.push_str(&format!(
            "{k}\t{}\t{:.6e}\t{:.10}\t{:.10}\t{:.8}\t{:.8}\t{}\t{}\t{}\n",
            level.resolution,
            level.spacing,
            level.alpha,
            level.mass,
            level.c.min(),
            level.c.max(),
            cell(delta),
            order.map(|p| format!("{p:.4}")).unwrap_or_default(),
            cell(level.oracle_error),
        ));
    }
    write_text(&args.out.join("convergence.tsv"), &table).solver()?;
    if !args.quiet {
        print!("{table}");
    }
    Ok(results.iter().all(|l| l.passed))
}
