//! The scalar problem `Δc = α c e^c` in Ω, `∂ν c = (γ − c) g` on ∂Ω.
//!
//! Iteration starts with the frozen-exponent (Picard) map
//! `Δc_{k+1} = α e^{c_k} c_{k+1}`, whose iterates stay in `[0, γ]` by the
//! discrete comparison principle, and hands over to damped Newton once the
//! Picard steps drop below [`ScalarSolveConfig::newton_switch`].

use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryData, Grid, ScalarField};
use crate::error::{Error, Result};
use crate::robin::{assemble, RobinOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalarSolveConfig {
    /// Sup-norm step tolerance of the outer iteration.
    pub tol_outer: f64,
    pub max_picard: usize,
    /// Picard step size below which Newton takes over.
    pub newton_switch: f64,
    /// Initial Newton damping; halved while the residual grows.
    pub damping: f64,
    pub max_newton: usize,
}

impl Default for ScalarSolveConfig {
    fn default() -> Self {
        Self {
            tol_outer: 1e-10,
            max_picard: 200,
            newton_switch: 1e-3,
            damping: 1.0,
            max_newton: 50,
        }
    }
}

impl ScalarSolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_outer > 0.0) {
            return Err(Error::Config("tol_outer must be positive".into()));
        }
        if self.max_picard < 1 {
            return Err(Error::Config("max_picard must be at least 1".into()));
        }
        if !(self.newton_switch > 0.0) {
            return Err(Error::Config("newton_switch must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Config("damping must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarSolution {
    pub c: ScalarField,
    pub alpha: f64,
    pub gamma: f64,
    pub picard_iterations: usize,
    pub newton_iterations: usize,
    /// Sup-norm size of every accepted update, Picard steps first.
    pub step_history: Vec<f64>,
    /// `‖Δ_h c − α c e^c‖∞` over all rows of the discrete system.
    pub pde_residual: f64,
    /// Largest defect of the discrete boundary condition, in flux units.
    pub bc_residual: f64,
}

impl ScalarSolution {
    pub fn iterations(&self) -> usize {
        self.picard_iterations + self.newton_iterations
    }
}

/// `F(z) = (e^z − 1) / z` with `F(0) = 1`.
pub fn exp_quotient(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// Zeroth-order coefficient of the Newton correction, `α e^c (1 + c)`.
pub fn newton_coefficient(alpha: f64, c: f64) -> f64 {
    alpha * c.exp() * (1.0 + c)
}

/// Coefficient of the difference-quotient equation between the solutions
/// `c1 = c_{α1}` and `c2 = c_{α2}`:
/// `Δ(c2 − c1) = (α2 − α1) c2 e^{c2} + [α1 e^{c2} + α1 c1 e^{c1} F(c2 − c1)] (c2 − c1)`.
/// Tends to [`newton_coefficient`] as `c2 → c1`.
pub fn quotient_coefficient(alpha1: f64, c1: f64, c2: f64) -> f64 {
    alpha1 * c2.exp() + alpha1 * c1 * c1.exp() * exp_quotient(c2 - c1)
}

fn check_params(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::Domain(format!("alpha must be nonnegative, got {alpha}")));
    }
    Ok(())
}

/// One frozen-exponent step: solves `(Δ − α e^{c̃}) c = 0`, `∂ν c + g c = γ g`.
pub fn picard_step(
    grid: &Grid,
    alpha: f64,
    boundary: &BoundaryData,
    c_tilde: &ScalarField,
) -> Result<ScalarField> {
    check_params(alpha)?;
    grid.check_field(c_tilde)?;
    let gamma = boundary.gamma();
    let slack = 1e-12 * gamma.max(1.0);
    if let Some(v) = c_tilde.iter().find(|&&v| !(v >= -slack && v <= gamma + slack)) {
        return Err(Error::Domain(format!("frozen iterate {v} outside [0, {gamma}]")));
    }
    let q = c_tilde.map(|c| alpha * c.exp());
    let op = assemble(grid, &q, boundary.g())?;
    let phi: Vec<f64> = boundary.g().iter().map(|g| gamma * g).collect();
    op.solve(&ScalarField::zeros(grid), &phi)
}

/// Residual evaluator for the discrete nonlinear system.
pub(crate) struct NonlinearResidual<'g> {
    base: RobinOperator<'g>,
    rhs: Vec<f64>,
    kappa: Vec<f64>,
    alpha: f64,
}

pub(crate) struct ResidualNorms {
    pub rows: Vec<f64>,
    pub pde: f64,
    pub bc: f64,
    /// rounding floor of the evaluation
    pub floor: f64,
}

impl<'g> NonlinearResidual<'g> {
    pub(crate) fn new(grid: &'g Grid, alpha: f64, boundary: &BoundaryData) -> Result<Self> {
        let base = assemble(grid, &ScalarField::zeros(grid), boundary.g())?;
        let phi: Vec<f64> = boundary.g().iter().map(|g| boundary.gamma() * g).collect();
        let rhs = base.rhs(&ScalarField::zeros(grid), &phi)?;
        let kappa = crate::robin::stencil(grid).kappa;
        Ok(Self { base, rhs, kappa, alpha })
    }

    pub(crate) fn eval(&self, c: &ScalarField) -> Result<ResidualNorms> {
        let grid = self.base.grid();
        let ac = self.base.apply(c)?;
        let rows: Vec<f64> = ac
            .iter()
            .zip(&self.rhs)
            .zip(c.iter())
            .map(|((a, b), &ci)| a - b - self.alpha * ci * ci.exp())
            .collect();
        let pde = rows.iter().map(|r| r.abs()).fold(0.0, f64::max);
        let bc = grid
            .boundary()
            .iter()
            .zip(&self.kappa)
            .map(|(node, k)| rows[node.index].abs() / k)
            .fold(0.0, f64::max);
        let abs = self.base.matrix().abs_mul_vec(c.values());
        let floor = 64.0
            * f64::EPSILON
            * abs
                .iter()
                .zip(&self.rhs)
                .map(|(a, b)| a + b.abs())
                .fold(0.0, f64::max);
        Ok(ResidualNorms { rows, pde, bc, floor })
    }
}

/// Residual tolerance accepted at convergence.
fn residual_tolerance(alpha: f64, gamma: f64, floor: f64) -> f64 {
    1e-8 * (alpha * gamma * gamma.exp()).max(1.0) + floor
}

pub fn solve_scalar(
    grid: &Grid,
    alpha: f64,
    boundary: &BoundaryData,
    cfg: &ScalarSolveConfig,
) -> Result<ScalarSolution> {
    let start = ScalarField::constant(grid, boundary.gamma());
    solve_scalar_from(grid, alpha, boundary, cfg, start)
}

/// Same as [`solve_scalar`] but starting from `initial`, which must lie in
/// `[0, γ]`.
pub fn solve_scalar_from(
    grid: &Grid,
    alpha: f64,
    boundary: &BoundaryData,
    cfg: &ScalarSolveConfig,
    initial: ScalarField,
) -> Result<ScalarSolution> {
    check_params(alpha)?;
    cfg.validate()?;
    grid.check_field(&initial)?;
    let gamma = boundary.gamma();

    if alpha == 0.0 {
        let c = ScalarField::constant(grid, gamma);
        let step = c.max_abs_diff(&initial);
        return Ok(ScalarSolution {
            c,
            alpha,
            gamma,
            picard_iterations: 1,
            newton_iterations: 0,
            step_history: vec![step],
            pde_residual: 0.0,
            bc_residual: 0.0,
        });
    }

    let residual = NonlinearResidual::new(grid, alpha, boundary)?;
    let mut c = initial;
    let mut history = Vec::new();
    let mut picard_iterations = 0;

    let finish = |c: ScalarField, norms: &ResidualNorms, history: Vec<f64>, picard, newton| ScalarSolution {
        c,
        alpha,
        gamma,
        picard_iterations: picard,
        newton_iterations: newton,
        step_history: history,
        pde_residual: norms.pde,
        bc_residual: norms.bc,
    };

    let mut switched = false;
    while picard_iterations < cfg.max_picard {
        let next = picard_step(grid, alpha, boundary, &c)?;
        let step = next.max_abs_diff(&c);
        c = next;
        picard_iterations += 1;
        history.push(step);
        if step < cfg.tol_outer {
            let norms = residual.eval(&c)?;
            if norms.pde <= residual_tolerance(alpha, gamma, norms.floor) {
                return Ok(finish(c, &norms, history, picard_iterations, 0));
            }
        }
        if step < cfg.newton_switch {
            switched = true;
            break;
        }
    }
    if !switched {
        let norms = residual.eval(&c)?;
        return Err(Error::NonConvergence {
            iterations: picard_iterations,
            last_step: history.last().copied().unwrap_or(f64::NAN),
            residual: norms.pde,
            step_history: history,
        });
    }

    let mut norms = residual.eval(&c)?;
    for newton in 1..=cfg.max_newton {
        let q = c.map(|v| newton_coefficient(alpha, v));
        let jacobian = assemble(grid, &q, boundary.g())?;
        let minus_r: Vec<f64> = norms.rows.iter().map(|r| -r).collect();
        let delta = jacobian.solve_system(&minus_r)?;

        let mut lambda = cfg.damping;
        let (trial, trial_norms) = loop {
            let trial = ScalarField::from_vec(
                c.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect(),
            );
            let trial_norms = residual.eval(&trial)?;
            if trial_norms.pde <= norms.pde.max(trial_norms.floor) || lambda < 1e-4 {
                break (trial, trial_norms);
            }
            lambda *= 0.5;
        };
        let step = lambda * delta.sup_norm();
        c = trial;
        norms = trial_norms;
        history.push(step);
        if step < cfg.tol_outer && norms.pde <= residual_tolerance(alpha, gamma, norms.floor) {
            return Ok(finish(c, &norms, history, picard_iterations, newton));
        }
    }
    Err(Error::NonConvergence {
        iterations: picard_iterations + cfg.max_newton,
        last_step: history.last().copied().unwrap_or(f64::NAN),
        residual: norms.pde,
        step_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, DomainSpec};

    fn interval(length: f64, n: usize) -> Grid {
        build_grid(DomainSpec::interval(length).unwrap(), n).unwrap()
    }

    #[test]
    fn zero_alpha_picard_step_is_saturation() {
        let grid = interval(1.0, 41);
        let bd = BoundaryData::new(&grid, 0.8, vec![1.0, 0.0]).unwrap();
        let c_tilde = ScalarField::from_fn(&grid, |p| 0.3 * p[0]);
        let c = picard_step(&grid, 0.0, &bd, &c_tilde).unwrap();
        for v in c.iter() {
            assert!((v - 0.8).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_alpha_converges_in_one_step() {
        let grid = interval(1.0, 41);
        let bd = BoundaryData::constant(&grid, 2.0, 1.0).unwrap();
        let sol = solve_scalar(&grid, 0.0, &bd, &ScalarSolveConfig::default()).unwrap();
        assert_eq!(sol.iterations(), 1);
        assert!(sol.c.iter().all(|&v| v == 2.0));
    }

    /// c'' = c on [0, 1] with c'(0) = c(0) − 1, c'(1) = 1 − c(1); by symmetry
    /// about 1/2, c = A cosh(x − 1/2) with A (cosh ½ + sinh ½) = 1.
    #[test]
    fn picard_step_matches_linear_closed_form() {
        let exact = |x: f64| (x - 0.5).cosh() / (0.5f64.cosh() + 0.5f64.sinh());
        let err = |n: usize| {
            let grid = interval(1.0, n);
            let bd = BoundaryData::constant(&grid, 1.0, 1.0).unwrap();
            let c = picard_step(&grid, 1.0, &bd, &ScalarField::zeros(&grid)).unwrap();
            c.max_abs_diff(&ScalarField::from_fn(&grid, |p| exact(p[0])))
        };
        let (e1, e2) = (err(41), err(81));
        assert!(e1 < 1e-4, "{e1}");
        let order = (e1 / e2).log2();
        assert!((1.9..=2.1).contains(&order), "{order}");
    }

    #[test]
    fn picard_step_rejects_out_of_range_iterate() {
        let grid = interval(1.0, 11);
        let bd = BoundaryData::constant(&grid, 1.0, 1.0).unwrap();
        let bad = ScalarField::constant(&grid, 1.5);
        assert!(matches!(picard_step(&grid, 1.0, &bd, &bad), Err(Error::Domain(_))));
    }

    #[test]
    fn converged_solution_is_picard_fixed_point() {
        let grid = interval(1.0, 101);
        let bd = BoundaryData::constant(&grid, 1.0, 1.0).unwrap();
        let sol = solve_scalar(&grid, 1.0, &bd, &ScalarSolveConfig::default()).unwrap();
        let again = picard_step(&grid, 1.0, &bd, &sol.c).unwrap();
        assert!(again.max_abs_diff(&sol.c) < 1e-10);
        assert!(sol.pde_residual < 1e-8 * 1f64.exp());
    }

    #[test]
    fn picard_iterates_stay_in_bounds() {
        let grid = build_grid(DomainSpec::ball(3, 1.0).unwrap(), 61).unwrap();
        let bd = BoundaryData::constant(&grid, 1.0, 1.0).unwrap();
        let mut c = ScalarField::constant(&grid, 1.0);
        for _ in 0..20 {
            c = picard_step(&grid, 8.0, &bd, &c).unwrap();
            assert!(c.min() >= -1e-12 && c.max() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn restart_from_zero_reaches_same_solution() {
        let grid = build_grid(DomainSpec::ball(3, 1.0).unwrap(), 101).unwrap();
        let bd = BoundaryData::constant(&grid, 1.0, 1.0).unwrap();
        let cfg = ScalarSolveConfig::default();
        let a = solve_scalar(&grid, 5.0, &bd, &cfg).unwrap();
        let b = solve_scalar_from(&grid, 5.0, &bd, &cfg, ScalarField::zeros(&grid)).unwrap();
        assert!(a.c.max_abs_diff(&b.c) < 1e-8);
    }

    #[test]
    fn nonconvergence_reports_history() {
        let grid = interval(1.0, 21);
        let bd = BoundaryData::constant(&grid, 1.0, 1.0).unwrap();
        let cfg = ScalarSolveConfig {
            max_picard: 2,
            newton_switch: 1e-14,
            ..Default::default()
        };
        match solve_scalar(&grid, 3.0, &bd, &cfg) {
            Err(Error::NonConvergence { step_history, iterations, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(step_history.len(), 2);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn monotone_in_alpha() {
        let grid = interval(2.0, 201);
        let bd = BoundaryData::new(&grid, 1.5, vec![0.5, 2.0]).unwrap();
        let cfg = ScalarSolveConfig::default();
        let lo = solve_scalar(&grid, 0.7, &bd, &cfg).unwrap();
        let hi = solve_scalar(&grid, 2.1, &bd, &cfg).unwrap();
        for (a, b) in hi.c.iter().zip(lo.c.iter()) {
            assert!(a <= &(b + 1e-8));
        }
    }

    #[test]
    fn newton_coefficient_is_quotient_limit() {
        for &(alpha, c) in &[(1.0, 0.3), (8.0, 0.088), (0.5, 2.0)] {
            let limit = newton_coefficient(alpha, c);
            assert!((quotient_coefficient(alpha, c, c) - limit).abs() <= 1e-14 * limit);
            let near = quotient_coefficient(alpha, c, c + 1e-7);
            assert!((near - limit).abs() < 1e-5 * limit);
        }
        assert_eq!(exp_quotient(0.0), 1.0);
        assert!((exp_quotient(1e-9) - 1.0).abs() < 1e-8);
        assert!((exp_quotient(1.0) - (1f64.exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn radial_derivative_monotone() {
        let grid = build_grid(DomainSpec::ball(3, 1.0).unwrap(), 201).unwrap();
        let bd = BoundaryData::constant(&grid, 1.0, 1.0).unwrap();
        let sol = solve_scalar(&grid, 4.0, &bd, &ScalarSolveConfig::default()).unwrap();
        let d: Vec<f64> = sol.c.values().windows(2).map(|w| w[1] - w[0]).collect();
        assert!(d.iter().all(|&v| v >= -1e-12));
        assert!(d.windows(2).all(|w| w[1] > w[0] - 1e-10));
    }
}
