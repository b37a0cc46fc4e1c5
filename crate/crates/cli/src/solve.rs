use chemosteady_core::mass::steady_state;

use crate::config::RunConfig;
use crate::failure::{Classify, Failure};
use crate::output::{field_table, write_json, write_text, Summary};
use crate::Common;

pub fn run(args: &Common) -> Result<bool, Failure> {
    let cfg = RunConfig::load(&args.config).config()?;
    let grid = cfg.grid().config()?;
    let boundary = cfg.boundary(&grid).config()?;
    let target = cfg.target().config()?;
    let state = steady_state(grid, boundary, target, &cfg.settings()).solver()?;

    let fields = field_table(&state.grid, &[("c", &state.c), ("n", &state.n)]);
    write_text(&args.out.join(&cfg.output.fields), &fields).solver()?;
    let summary = Summary::new(&state, cfg.resolution());
    write_json(&args.out.join(&cfg.output.summary), &summary).solver()?;

    if !args.quiet {
        println!(
            "alpha = {:.10}  mass = {:.10}  c in [{:.6}, {:.6}]  n in [{:.6}, {:.6}]",
            summary.alpha, summary.mass, summary.c_min, summary.c_max, summary.n_min, summary.n_max
        );
        for check in &state.report.checks {
            println!("  {:<22} {:?}  {}", check.name, check.status, check.detail);
        }
    }
    for failed in state.report.failures() {
        eprintln!("check failed: {} ({}): {}", failed.name, failed.property, failed.detail);
    }
    Ok(state.report.all_passed())
}
