//! The mass map `m(α) = α ∫ e^{c_α}`, its derivative, its inverse, and the
//! assembled steady state `(n, c)` with `n = α e^c`.

use serde::Serialize;

use crate::diagnostics::{run_all, CheckReport};
use crate::domain::{integrate, BoundaryData, DomainKind, Grid, ScalarField};
use crate::error::{Error, Result};
use crate::robin::{assemble, radial_volumes};
use crate::scalar::{newton_coefficient, solve_scalar, solve_scalar_from, ScalarSolution, ScalarSolveConfig};

/// Default relative tolerance of [`invert_mass`].
pub const DEFAULT_MASS_TOL: f64 = 1e-8;

const MAX_INVERSION_STEPS: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct MassMapEval {
    pub alpha: f64,
    pub mass: f64,
    pub solution: ScalarSolution,
    pub c_prime: Option<ScalarField>,
    pub dmass: Option<f64>,
}

fn evaluate(grid: &Grid, alpha: f64, sol: ScalarSolution) -> Result<MassMapEval> {
    let mass = alpha * integrate(&sol.c.map(f64::exp), grid)?;
    Ok(MassMapEval {
        alpha,
        mass,
        solution: sol,
        c_prime: None,
        dmass: None,
    })
}

pub fn mass_of_alpha(
    alpha: f64,
    boundary: &BoundaryData,
    grid: &Grid,
    cfg: &ScalarSolveConfig,
) -> Result<MassMapEval> {
    let sol = solve_scalar(grid, alpha, boundary, cfg)?;
    evaluate(grid, alpha, sol)
}

/// [`mass_of_alpha`] with `c′_α` and `m′(α)` filled in (requires `α > 0`).
pub fn mass_with_derivative(
    alpha: f64,
    boundary: &BoundaryData,
    grid: &Grid,
    cfg: &ScalarSolveConfig,
) -> Result<MassMapEval> {
    let mut eval = mass_of_alpha(alpha, boundary, grid, cfg)?;
    let (cp, dm) = dmass_dalpha(grid, boundary, &eval.solution)?;
    eval.c_prime = Some(cp);
    eval.dmass = Some(dm);
    Ok(eval)
}

/// Solves the linearized problem for `c′_α`,
/// `(Δ − α e^c (1 + c)) c′ = c e^c`, `∂ν c′ + g c′ = 0`,
/// and returns it with `m′(α) = ∫ e^c (1 + α c′)`.
///
/// Fails with [`Error::Discretization`] if `c′` leaves `(−1/α, 0]`.
pub fn dmass_dalpha(
    grid: &Grid,
    boundary: &BoundaryData,
    solution: &ScalarSolution,
) -> Result<(ScalarField, f64)> {
    let alpha = solution.alpha;
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("derivative of the mass map needs alpha > 0, got {alpha}")));
    }
    let c = &solution.c;
    let q = c.map(|v| newton_coefficient(alpha, v));
    let f = c.map(|v| v * v.exp());
    let op = assemble(grid, &q, boundary.g())?;
    let cp = op.solve(&f, &vec![0.0; grid.boundary().len()])?;

    let upper_slack = 1e-12 / alpha;
    let (imax, vmax) = cp.argmax();
    if vmax > upper_slack {
        return Err(Error::Discretization(format!(
            "c' = {vmax:e} > 0 at node {imax}"
        )));
    }
    let (imin, vmin) = cp.argmin();
    if vmin <= -1.0 / alpha {
        return Err(Error::Discretization(format!(
            "c' = {vmin} <= -1/alpha = {} at node {imin}",
            -1.0 / alpha
        )));
    }
    let integrand = ScalarField::from_vec(
        c.iter()
            .zip(cp.iter())
            .map(|(&cv, &d)| cv.exp() * (1.0 + alpha * d))
            .collect(),
    );
    let dmass = integrate(&integrand, grid)?;
    if !(dmass > 0.0) {
        return Err(Error::Discretization(format!("mass derivative {dmass} not positive")));
    }
    Ok((cp, dmass))
}

/// Bracket `[m e^{−γ} / |Ω|_h, m / |Ω|_h]` for the α of mass `m`, from
/// `|Ω|_h ≤ ∫ e^c ≤ e^γ |Ω|_h` with `|Ω|_h` the discrete measure.
pub fn alpha_bracket(m_target: f64, gamma: f64, grid: &Grid) -> (f64, f64) {
    let measure = grid.discrete_measure();
    (m_target * (-gamma).exp() / measure, m_target / measure)
}

/// Finds `α` with `|m(α) − m| ≤ tol · m` by Newton's method on the mass map,
/// safeguarded by bisection on the a-priori bracket.
pub fn invert_mass(
    m_target: f64,
    boundary: &BoundaryData,
    grid: &Grid,
    cfg: &ScalarSolveConfig,
    tol: f64,
) -> Result<MassMapEval> {
    if !(m_target.is_finite() && m_target > 0.0) {
        return Err(Error::Domain(format!("target mass must be positive, got {m_target}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Config("mass tolerance must be positive".into()));
    }
    let gamma = boundary.gamma();
    let (mut lo, mut hi) = alpha_bracket(m_target, gamma, grid);

    let at_lo = mass_of_alpha(lo, boundary, grid, cfg)?;
    let at_hi = mass_of_alpha(hi, boundary, grid, cfg)?;
    let (f_lo, f_hi) = (at_lo.mass - m_target, at_hi.mass - m_target);
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let done = |e: &MassMapEval| (e.mass - m_target).abs() <= tol * m_target;
    for end in [&at_lo, &at_hi] {
        if done(end) {
            let mut e = end.clone();
            let (cp, dm) = dmass_dalpha(grid, boundary, &e.solution)?;
            e.c_prime = Some(cp);
            e.dmass = Some(dm);
            return Ok(e);
        }
    }

    // regula falsi start, then Newton with the exact derivative
    let mut alpha = lo + (m_target - at_lo.mass) * (hi - lo) / (at_hi.mass - at_lo.mass);
    let mut warm = at_hi.solution.c.clone();
    for _ in 0..MAX_INVERSION_STEPS {
        let start = warm.map(|v| v.clamp(0.0, gamma));
        let sol = solve_scalar_from(grid, alpha, boundary, cfg, start)?;
        let mut eval = evaluate(grid, alpha, sol)?;
        let (cp, dm) = dmass_dalpha(grid, boundary, &eval.solution)?;
        eval.c_prime = Some(cp);
        eval.dmass = Some(dm);
        if done(&eval) {
            return Ok(eval);
        }
        let defect = eval.mass - m_target;
        if defect < 0.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        let newton = alpha - defect / dm;
        alpha = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        warm = eval.solution.c;
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_INVERSION_STEPS,
        last_step: hi - lo,
        residual: f64::NAN,
        step_history: Vec::new(),
    })
}

/// Sup-norm over interior nodes of the discrete divergence
/// `∇_h · (∇_h n − n̄ ∇_h c)`, with face averages `n̄`. It vanishes in the
/// continuum whenever `n = α e^c`, so it measures consistency only.
pub fn n_equation_residual(grid: &Grid, n: &ScalarField, c: &ScalarField) -> Result<f64> {
    grid.check_field(n)?;
    grid.check_field(c)?;
    let flux = |a: usize, b: usize, h: f64| {
        (n[b] - n[a]) / h - 0.5 * (n[a] + n[b]) * (c[b] - c[a]) / h
    };
    let [nx, ny] = grid.shape();
    let [hx, hy] = grid.spacing();
    let mut worst: f64 = 0.0;
    match grid.domain().kind() {
        DomainKind::Interval { .. } => {
            for i in 1..nx - 1 {
                let div = (flux(i, i + 1, hx) - flux(i - 1, i, hx)) / hx;
                worst = worst.max(div.abs());
            }
        }
        DomainKind::RadialBall { dimension, .. } => {
            let vol = radial_volumes(grid, dimension);
            let p = dimension as i32 - 1;
            for i in 0..nx - 1 {
                let r = grid.node(i)[0];
                let outer = (r + 0.5 * hx).powi(p) * flux(i, i + 1, hx);
                let inner = if i == 0 { 0.0 } else { (r - 0.5 * hx).powi(p) * flux(i - 1, i, hx) };
                worst = worst.max(((outer - inner) / vol[i]).abs());
            }
        }
        DomainKind::Rectangle { .. } => {
            for j in 1..ny - 1 {
                for i in 1..nx - 1 {
                    let k = grid.index(i, j);
                    let div = (flux(k, k + 1, hx) - flux(k - 1, k, hx)) / hx
                        + (flux(k, k + nx, hy) - flux(k - nx, k, hy)) / hy;
                    worst = worst.max(div.abs());
                }
            }
        }
    }
    Ok(worst)
}

/// What the steady state is pinned by.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Target {
    Mass(f64),
    Alpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    pub scalar: ScalarSolveConfig,
    pub mass_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            scalar: ScalarSolveConfig::default(),
            mass_tol: DEFAULT_MASS_TOL,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyState {
    #[serde(skip)]
    pub grid: Grid,
    pub boundary: BoundaryData,
    pub n: ScalarField,
    pub c: ScalarField,
    pub alpha: f64,
    pub mass_target: Option<f64>,
    pub mass_achieved: f64,
    pub mass_tol: f64,
    pub solution: ScalarSolution,
    pub c_prime: Option<ScalarField>,
    pub dmass: Option<f64>,
    pub n_residual: f64,
    pub report: CheckReport,
}

/// Full pipeline: invert the mass map (or take `α` directly), form
/// `n = α e^c`, and run the diagnostics battery.
pub fn steady_state(
    grid: Grid,
    boundary: BoundaryData,
    target: Target,
    settings: &SolverSettings,
) -> Result<SteadyState> {
    let eval = match target {
        Target::Mass(m) => invert_mass(m, &boundary, &grid, &settings.scalar, settings.mass_tol)?,
        Target::Alpha(alpha) if alpha > 0.0 => mass_with_derivative(alpha, &boundary, &grid, &settings.scalar)?,
        Target::Alpha(alpha) => mass_of_alpha(alpha, &boundary, &grid, &settings.scalar)?,
    };
    let alpha = eval.alpha;
    let c = eval.solution.c.clone();
    let n = c.map(|v| alpha * v.exp());
    let mass_achieved = integrate(&n, &grid)?;
    let n_residual = n_equation_residual(&grid, &n, &c)?;
    let mut state = SteadyState {
        grid,
        boundary,
        n,
        c,
        alpha,
        mass_target: match target {
            Target::Mass(m) => Some(m),
            Target::Alpha(_) => None,
        },
        mass_achieved,
        mass_tol: settings.mass_tol,
        solution: eval.solution,
        c_prime: eval.c_prime,
        dmass: eval.dmass,
        n_residual,
        report: CheckReport::default(),
    };
    state.report = run_all(&state);
    Ok(state)
}
