//! Executable checks of the qualitative properties every steady state must
//! have. Checks report, they never fail with an error; a check whose
//! hypotheses do not hold for the given geometry reports `Skipped`.

use serde::Serialize;

use crate::domain::{BoundaryData, DomainKind, Grid, ScalarField};
use crate::error::Result;
use crate::mass::{invert_mass, mass_of_alpha, SteadyState};
use crate::robin::solve_robin;
use crate::scalar::{ScalarSolution, ScalarSolveConfig};

/// Relative tolerance of the mass-map round trip.
pub const ROUND_TRIP_TOL: f64 = 1e-6;

/// Slack for properties the discrete scheme satisfies exactly.
pub const EXACT_SLACK: f64 = 1e-12;
/// Slack for second-difference sign conditions.
pub const CONVEXITY_SLACK: f64 = 1e-10;
/// Slack for properties that hold in the continuum only.
pub const CONTINUUM_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// The mathematical statement being checked.
    pub property: String,
    pub status: Status,
    /// Largest signed violation over all nodes (negative means satisfied
    /// with that margin).
    pub worst_violation: f64,
    pub location: Option<usize>,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn skipped(name: &str, property: &str, why: &str) -> Self {
        Self {
            name: name.into(),
            property: property.into(),
            status: Status::Skipped,
            worst_violation: 0.0,
            location: None,
            tolerance: 0.0,
            detail: why.into(),
        }
    }

    fn graded(name: &str, property: &str, worst: (f64, Option<usize>), tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            property: property.into(),
            status: if worst.0 <= tolerance { Status::Passed } else { Status::Failed },
            worst_violation: worst.0,
            location: worst.1,
            tolerance,
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Passed
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckReport {
    pub checks: Vec<CheckResult>,
}

impl CheckReport {
    /// True when no check failed (skipped checks do not count as failures).
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Failed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == Status::Failed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Running maximum of `(violation, node)`.
fn worst(values: impl Iterator<Item = (usize, f64)>) -> (f64, Option<usize>) {
    values.fold((f64::NEG_INFINITY, None), |acc, (i, v)| if v > acc.0 { (v, Some(i)) } else { acc })
}

const BOUNDS: &str = "0 <= c <= gamma, strictly inside when alpha*gamma > 0";

pub fn check_bounds(sol: &ScalarSolution) -> CheckResult {
    let gamma = sol.gamma;
    let c = &sol.c;
    let closed = worst(c.iter().enumerate().map(|(i, &v)| (i, (-v).max(v - gamma))));
    let mut result = CheckResult::graded(
        "bounds",
        BOUNDS,
        closed,
        EXACT_SLACK,
        format!("min c = {:.6}, max c = {:.6}", c.min(), c.max()),
    );
    if sol.alpha * gamma > 0.0 {
        // strict version: c > 1e-12 and c < gamma − 1e-12
        let strict = worst(
            c.iter()
                .enumerate()
                .map(|(i, &v)| (i, (EXACT_SLACK - v).max(v - (gamma - EXACT_SLACK)))),
        );
        if strict.0 >= 0.0 && result.passed() {
            result.status = Status::Failed;
            result.worst_violation = strict.0;
            result.location = strict.1;
            result.detail.push_str("; strict interior bound violated");
        }
    } else {
        result.detail.push_str("; strict sub-check skipped (alpha*gamma = 0, c = gamma)");
    }
    result
}

const NONCONSTANT: &str = "c is non-constant unless alpha*gamma = 0, in which case c = gamma";

pub fn check_nonconstant(sol: &ScalarSolution) -> CheckResult {
    let spread = sol.c.max() - sol.c.min();
    if sol.alpha * sol.gamma > 0.0 {
        CheckResult::graded(
            "nonconstant",
            NONCONSTANT,
            (EXACT_SLACK - spread, None),
            0.0,
            format!("max c - min c = {spread:e}"),
        )
    } else {
        let dev = worst(sol.c.iter().enumerate().map(|(i, &v)| (i, (v - sol.gamma).abs())));
        CheckResult::graded("nonconstant", NONCONSTANT, dev, EXACT_SLACK, "degenerate branch".into())
    }
}

const CONVEXITY: &str = "radial profiles: d_r c > 0, d_r c increasing, c and n = alpha e^c convex";

/// Sign conditions on radial differences of `c` and `n = α e^c`.
/// Applies to balls (and intervals, the one-dimensional case) with constant `g`.
pub fn check_radial_convexity(grid: &Grid, boundary: &BoundaryData, sol: &ScalarSolution) -> CheckResult {
    let name = "radial_convexity";
    let radial = match grid.domain().kind() {
        DomainKind::RadialBall { .. } => true,
        DomainKind::Interval { .. } => false,
        DomainKind::Rectangle { .. } => {
            return CheckResult::skipped(name, CONVEXITY, "requires a ball or an interval");
        }
    };
    if boundary.constant_g().is_none() {
        return CheckResult::skipped(name, CONVEXITY, "requires constant permeability");
    }
    if sol.alpha * sol.gamma == 0.0 {
        return CheckResult::skipped(name, CONVEXITY, "constant solution (alpha*gamma = 0)");
    }
    let c = sol.c.values();
    let n: Vec<f64> = c.iter().map(|v| sol.alpha * v.exp()).collect();
    let second = |v: &[f64]| -> Vec<(usize, f64)> {
        v.windows(3)
            .enumerate()
            .map(|(i, w)| (i + 1, -(w[2] - 2.0 * w[1] + w[0])))
            .collect()
    };
    let wc = worst(second(c).into_iter());
    let wn = worst(second(&n).into_iter());
    let mut result = if wc.0 >= wn.0 {
        CheckResult::graded(name, CONVEXITY, wc, CONVEXITY_SLACK, String::new())
    } else {
        CheckResult::graded(name, CONVEXITY, wn, CONVEXITY_SLACK, String::new())
    };
    result.detail = format!("min second difference: c {:e}, n {:e}", -wc.0, -wn.0);
    if radial {
        // ∂_r c ≥ 0 (forward differences)
        let wd = worst(c.windows(2).enumerate().map(|(i, w)| (i, w[0] - w[1])));
        result.detail.push_str(&format!(", min first difference {:e}", -wd.0));
        if wd.0 > EXACT_SLACK && result.passed() {
            result.status = Status::Failed;
            result.worst_violation = wd.0;
            result.location = wd.1;
        }
    }
    result
}

const ENVELOPE: &str =
    "g/(g+s) exp((r-R) s) gamma <= c(r) <= gamma with s = sqrt(m e^gamma / |Omega|)";

/// Lower envelope of the signal on a ball of radius `radius` at distance `r`.
pub fn boundary_envelope(r: f64, radius: f64, g: f64, gamma: f64, mass_density: f64) -> f64 {
    let s = (mass_density * gamma.exp()).sqrt();
    g / (g + s) * ((r - radius) * s).exp() * gamma
}

/// Checks `c` against the closed-form envelope on a ball with constant `g`;
/// `mass` is the total bacterial mass.
pub fn check_boundary_estimate_field(
    grid: &Grid,
    boundary: &BoundaryData,
    c: &ScalarField,
    mass: f64,
) -> CheckResult {
    let name = "boundary_estimate";
    let DomainKind::RadialBall { radius, .. } = grid.domain().kind() else {
        return CheckResult::skipped(name, ENVELOPE, "requires a ball");
    };
    let Some(g) = boundary.constant_g().filter(|&g| g > 0.0) else {
        return CheckResult::skipped(name, ENVELOPE, "requires constant positive permeability");
    };
    if !(mass > 0.0) {
        return CheckResult::skipped(name, ENVELOPE, "requires positive mass");
    }
    let gamma = boundary.gamma();
    let density = mass / grid.domain().measure();
    let env: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|p| boundary_envelope(p[0], radius, g, gamma, density))
        .collect();
    let lower = worst(c.iter().zip(&env).enumerate().map(|(i, (v, e))| (i, e - v)));
    let upper = worst(c.iter().enumerate().map(|(i, &v)| (i, v - gamma)));
    let detail = format!(
        "envelope at r = R: {:.6}, c(R) = {:.6}",
        env[env.len() - 1],
        c[c.len() - 1]
    );
    let mut result = CheckResult::graded(name, ENVELOPE, lower, CONTINUUM_SLACK, detail);
    if upper.0 > EXACT_SLACK && result.passed() {
        result.status = Status::Failed;
        result.worst_violation = upper.0;
        result.location = upper.1;
    }
    result
}

pub fn check_boundary_estimate(state: &SteadyState) -> CheckResult {
    let mass = state.mass_target.unwrap_or(state.mass_achieved);
    check_boundary_estimate_field(&state.grid, &state.boundary, &state.c, mass)
}

const MONOTONE: &str = "alpha1 < alpha2 implies c_alpha2 <= c_alpha1 and m(alpha1) < m(alpha2)";

/// Solves at each `α` (strictly increasing) and checks the nodewise reverse
/// ordering of the signals and the strict increase of the masses.
pub fn check_alpha_monotonicity(
    grid: &Grid,
    boundary: &BoundaryData,
    alphas: &[f64],
    cfg: &ScalarSolveConfig,
) -> CheckResult {
    let name = "alpha_monotonicity";
    if alphas.len() < 2 || alphas.windows(2).any(|w| w[1] <= w[0]) || alphas[0] < 0.0 {
        return CheckResult {
            status: Status::Failed,
            detail: "alpha list must be nonnegative and strictly increasing with at least two entries".into(),
            ..CheckResult::skipped(name, MONOTONE, "")
        };
    }
    let mut evals = Vec::with_capacity(alphas.len());
    for &a in alphas {
        match mass_of_alpha(a, boundary, grid, cfg) {
            Ok(e) => evals.push(e),
            Err(err) => {
                return CheckResult {
                    status: Status::Failed,
                    worst_violation: f64::INFINITY,
                    detail: format!("solve at alpha = {a} failed: {err}"),
                    ..CheckResult::skipped(name, MONOTONE, "")
                };
            }
        }
    }
    let mut field = (f64::NEG_INFINITY, None);
    let mut strict_somewhere = true;
    for pair in evals.windows(2) {
        let (lo, hi) = (&pair[0].solution.c, &pair[1].solution.c);
        let w = worst(hi.iter().zip(lo.iter()).enumerate().map(|(i, (a, b))| (i, a - b)));
        if w.0 > field.0 {
            field = w;
        }
        strict_somewhere &= hi.iter().zip(lo.iter()).any(|(a, b)| a < b);
    }
    let mass_gap = evals
        .windows(2)
        .map(|p| p[0].mass - p[1].mass)
        .fold(f64::NEG_INFINITY, f64::max);
    let masses: Vec<String> = evals.iter().map(|e| format!("{:.6}", e.mass)).collect();
    let mut result = CheckResult::graded(
        name,
        MONOTONE,
        field,
        CONTINUUM_SLACK,
        format!("masses [{}]", masses.join(", ")),
    );
    if result.passed() && (mass_gap >= 0.0 || !strict_somewhere) {
        result.status = Status::Failed;
        result.detail.push_str("; masses or fields not strictly ordered");
    }
    result
}

const DERIVATIVE: &str = "-1/alpha < dc/dalpha <= 0";

pub fn check_derivative_bounds(alpha: f64, c_prime: &ScalarField) -> CheckResult {
    let name = "derivative_bounds";
    if !(alpha > 0.0) {
        return CheckResult::skipped(name, DERIVATIVE, "requires alpha > 0");
    }
    let upper = worst(c_prime.iter().enumerate().map(|(i, &v)| (i, v)));
    let lower = worst(c_prime.iter().enumerate().map(|(i, &v)| (i, -1.0 / alpha - v)));
    let w = if upper.0 >= lower.0 { upper } else { lower };
    let mut r = CheckResult::graded(
        name,
        DERIVATIVE,
        w,
        CONVEXITY_SLACK,
        format!("range [{:e}, {:e}]", c_prime.min(), c_prime.max()),
    );
    // the lower bound is strict
    if lower.0 >= 0.0 {
        r.status = Status::Failed;
    }
    r
}

const RELATION: &str = "n = alpha e^c, positive and non-constant for positive mass";

fn check_population(state: &SteadyState) -> CheckResult {
    let name = "population";
    let rel = worst(
        state
            .n
            .iter()
            .zip(state.c.iter())
            .enumerate()
            .map(|(i, (n, c))| (i, (n - state.alpha * c.exp()).abs())),
    );
    let mut r = CheckResult::graded(
        name,
        RELATION,
        rel,
        0.0,
        format!("min n = {:.6}, max n = {:.6}", state.n.min(), state.n.max()),
    );
    if state.alpha > 0.0 && r.passed() && !(state.n.min() > 0.0 && state.n.max() > state.n.min()) {
        r.status = Status::Failed;
        r.detail.push_str("; n not positive and non-constant");
    }
    r
}

const MASS: &str = "integral of n matches the prescribed mass";

fn check_mass(state: &SteadyState) -> CheckResult {
    match state.mass_target {
        Some(m) => CheckResult::graded(
            "mass",
            MASS,
            ((state.mass_achieved - m).abs() / m, None),
            state.mass_tol,
            format!("target {m:.10}, achieved {:.10}", state.mass_achieved),
        ),
        None => CheckResult::skipped("mass", MASS, "alpha prescribed directly"),
    }
}

const SANDWICH: &str = "w_barrier <= (c_alpha2 - c_alpha1)/(alpha2 - alpha1) <= 0";

/// Lower barrier for difference quotients in `α`: solves
/// `Δw = γe^γ` with `∂νw + g w = 0`.
pub fn consumption_barrier(grid: &Grid, boundary: &BoundaryData) -> Result<ScalarField> {
    let gamma = boundary.gamma();
    solve_robin(
        grid,
        &ScalarField::zeros(grid),
        boundary.g(),
        &ScalarField::constant(grid, gamma * gamma.exp()),
        &vec![0.0; grid.boundary().len()],
    )
}

/// Checks the difference quotient of two signals against `[barrier, 0]`.
pub fn check_w_sandwich(
    barrier: &ScalarField,
    (alpha1, c1): (f64, &ScalarField),
    (alpha2, c2): (f64, &ScalarField),
) -> CheckResult {
    let name = "w_sandwich";
    if !(alpha2 > alpha1) || c1.len() != c2.len() || barrier.len() != c1.len() {
        return CheckResult {
            status: Status::Failed,
            detail: "needs alpha1 < alpha2 and matching fields".into(),
            ..CheckResult::skipped(name, SANDWICH, "")
        };
    }
    let w: Vec<f64> = c2.iter().zip(c1.iter()).map(|(b, a)| (b - a) / (alpha2 - alpha1)).collect();
    let v = worst(w.iter().zip(barrier.iter()).enumerate().map(|(i, (&w, &lo))| (i, w.max(lo - w))));
    CheckResult::graded(
        name,
        SANDWICH,
        v,
        CONTINUUM_SLACK,
        format!("alpha pair ({alpha1}, {alpha2}), min barrier {:.6}", barrier.min()),
    )
}

const ROUND_TRIP: &str = "inverting the mass map at m(alpha) recovers alpha";

pub fn check_mass_round_trip(
    grid: &Grid,
    boundary: &BoundaryData,
    alpha: f64,
    cfg: &ScalarSolveConfig,
    mass_tol: f64,
) -> CheckResult {
    let name = "mass_round_trip";
    let trip = mass_of_alpha(alpha, boundary, grid, cfg)
        .and_then(|e| invert_mass(e.mass, boundary, grid, cfg, mass_tol));
    match trip {
        Ok(back) => CheckResult::graded(
            name,
            ROUND_TRIP,
            ((back.alpha - alpha).abs() / alpha, None),
            ROUND_TRIP_TOL,
            format!("alpha {alpha} -> {}", back.alpha),
        ),
        Err(err) => CheckResult {
            status: Status::Failed,
            worst_violation: f64::INFINITY,
            detail: format!("round trip at alpha = {alpha} failed: {err}"),
            ..CheckResult::skipped(name, ROUND_TRIP, "")
        },
    }
}

/// Every check applicable to the state's geometry.
pub fn run_all(state: &SteadyState) -> CheckReport {
    let mut checks = vec![
        check_bounds(&state.solution),
        check_nonconstant(&state.solution),
        check_population(state),
        check_mass(state),
    ];
    checks.push(match &state.c_prime {
        Some(cp) => check_derivative_bounds(state.alpha, cp),
        None => CheckResult::skipped("derivative_bounds", DERIVATIVE, "derivative not computed"),
    });
    checks.push(check_radial_convexity(&state.grid, &state.boundary, &state.solution));
    checks.push(check_boundary_estimate(state));
    CheckReport { checks }
}
