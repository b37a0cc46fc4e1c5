//! Discretization-free reference solutions in one dimension.
//!
//! On `[0, L]` with `c′(0) = 0` and `c′(L) = G (γ − c(L))`, multiplying
//! `c″ = α c e^c` by `c′` gives `(c′)² = 2α Φ(c, c₀)` with
//! `Φ(c, c₀) = (c − 1) e^c − (c₀ − 1) e^{c₀}` and `c₀ = c(0)`. Hence
//!
//! ```text
//! x = (2α)^{-1/2} ∫_{c₀}^{c(x)} Φ(s, c₀)^{-1/2} ds
//! ```
//!
//! and `c₀` is fixed by the boundary closure `G (γ − c(L)) = √(2α Φ(c(L), c₀))`.
//! Only quadrature and scalar root finding are involved.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::rootfind::{bisect, brent};

/// Absolute tolerance of [`position_of`].
pub const POSITION_TOL: f64 = 1e-10;

// internal tolerances, tighter than the public contract so the oracle stays
// well below the discretization errors it is compared against
const INNER_QUAD_TOL: f64 = 1e-14;
const ROOT_TOL: f64 = 1e-15;

/// `Φ(c, c₀) = (c − 1) e^c − (c₀ − 1) e^{c₀}` for `c ≥ c₀ ≥ 0`.
pub fn phi(c: f64, c0: f64) -> Result<f64> {
    if !(c0 >= 0.0) || c < c0 {
        return Err(Error::Domain(format!("phi needs c >= c0 >= 0, got c = {c}, c0 = {c0}")));
    }
    let t = c - c0;
    // e^{c₀} [(c₀ − 1)(e^t − 1) + t e^t], free of cancellation for small t
    Ok(c0.exp() * ((c0 - 1.0) * t.exp_m1() + t * t.exp()))
}

/// `Φ(c₀ + t, c₀) / t`, with its limit `c₀ e^{c₀}` at `t = 0`.
fn phi_over_t(t: f64, c0: f64) -> f64 {
    let q = if t == 0.0 { 1.0 } else { t.exp_m1() / t };
    c0.exp() * ((c0 - 1.0) * q + t.exp())
}

fn check_position_args(c_val: f64, c0: f64, alpha: f64) -> Result<()> {
    if !(c0 > 0.0) || !(alpha > 0.0) || c_val < c0 {
        return Err(Error::Domain(format!(
            "position_of needs c >= c0 > 0 and alpha > 0, got c = {c_val}, c0 = {c0}, alpha = {alpha}"
        )));
    }
    Ok(())
}

fn position_with_tol(c_val: f64, c0: f64, alpha: f64, tol: f64) -> Result<f64> {
    check_position_args(c_val, c0, alpha)?;
    // substitution c = c₀ + s² removes the inverse square-root singularity
    let s_max = (c_val - c0).sqrt();
    let integrand = |s: f64| 2.0 / phi_over_t(s * s, c0).sqrt();
    let scale = (2.0 * alpha).sqrt();
    let integral = integrate_adaptive(integrand, 0.0, s_max, tol * scale, 0.0)?;
    Ok(integral / scale)
}

/// Position `x` at which the profile with minimum `c₀` reaches `c_val`.
pub fn position_of(c_val: f64, c0: f64, alpha: f64) -> Result<f64> {
    position_with_tol(c_val, c0, alpha, POSITION_TOL)
}

fn position_tight(c_val: f64, c0: f64, alpha: f64) -> Result<f64> {
    position_with_tol(c_val, c0, alpha, INNER_QUAD_TOL)
}

/// Value `c(L)` reached at `x = length`, or `None` when the profile blows up
/// before reaching it.
fn value_at(length: f64, c0: f64, alpha: f64) -> Result<Option<f64>> {
    let mut step = 1.0;
    let mut hi = c0 + step;
    loop {
        if position_tight(hi, c0, alpha)? >= length {
            break;
        }
        step *= 2.0;
        hi = c0 + step;
        if hi > 600.0 {
            return Ok(None);
        }
    }
    let c = brent(|c| Ok(position_tight(c, c0, alpha)? - length), c0, hi, ROOT_TOL)?;
    Ok(Some(c))
}

/// Reference profile on the half interval `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleProfile {
    pub alpha: f64,
    pub gamma: f64,
    /// Permeability at `x = L`.
    pub g_right: f64,
    pub half_length: f64,
    /// Minimum value `c(0)`.
    pub c0: f64,
    pub c_at_l: f64,
}

impl OracleProfile {
    /// `c(x)` for `x ∈ [0, L]`, by inverting the position integral.
    pub fn sample(&self, x: f64) -> Result<f64> {
        if !(0.0..=self.half_length).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, {}]", self.half_length)));
        }
        if x == 0.0 {
            return Ok(self.c0);
        }
        if x == self.half_length {
            return Ok(self.c_at_l);
        }
        // c(L) itself is only known to ROOT_TOL; widen so x near L stays bracketed
        let hi = self.c_at_l + 1e-9 * (1.0 + self.c_at_l);
        brent(
            |c| Ok(position_tight(c, self.c0, self.alpha)? - x),
            self.c0,
            hi,
            ROOT_TOL,
        )
    }

    /// Residual of the boundary closure `G (γ − c(L)) − √(2α Φ(c(L), c₀))`.
    pub fn closure_defect(&self) -> Result<f64> {
        Ok(self.g_right * (self.gamma - self.c_at_l)
            - (2.0 * self.alpha * phi(self.c_at_l, self.c0)?).sqrt())
    }
}

/// Boundary defect as a function of the trial minimum `c₀`; `−∞` when the
/// profile blows up inside `[0, L]`.
pub fn boundary_defect(length: f64, g_right: f64, gamma: f64, alpha: f64, c0: f64) -> Result<f64> {
    match value_at(length, c0, alpha)? {
        Some(cl) => Ok(g_right * (gamma - cl) - (2.0 * alpha * phi(cl, c0)?).sqrt()),
        None => Ok(f64::NEG_INFINITY),
    }
}

/// Samples the boundary defect at `points` values of `c₀` spread over `(0, γ]`.
pub fn defect_sweep(length: f64, g_right: f64, gamma: f64, alpha: f64, points: usize) -> Result<Vec<(f64, f64)>> {
    (1..=points)
        .map(|k| {
            let c0 = gamma * k as f64 / points as f64;
            Ok((c0, boundary_defect(length, g_right, gamma, alpha, c0)?))
        })
        .collect()
}

/// Solves the half-interval problem of length `length` with permeability
/// `g_right` at `x = L`: bisection on `c₀`, nested root-find for `c(L)`.
pub fn solve_oracle(length: f64, g_right: f64, gamma: f64, alpha: f64) -> Result<OracleProfile> {
    for (name, v) in [("L", length), ("G", g_right), ("gamma", gamma), ("alpha", alpha)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    let defect = |c0: f64| boundary_defect(length, g_right, gamma, alpha, c0);

    // c₀ = γ forces c(L) > γ and a negative defect; shrink the lower end
    // until the defect turns positive
    let hi = gamma;
    let f_hi = defect(hi)?;
    let mut lo = 0.5 * gamma;
    let mut f_lo = defect(lo)?;
    let mut halvings = 0;
    while f_lo <= 0.0 {
        halvings += 1;
        if halvings > 1000 || lo < f64::MIN_POSITIVE {
            return Err(Error::Bracket { lo, hi, f_lo, f_hi });
        }
        lo *= 0.5;
        f_lo = defect(lo)?;
    }
    if f_hi >= 0.0 {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let c0 = bisect(|c0| {
        let d = defect(c0)?;
        Ok(if d.is_finite() { d } else { -1.0 })
    }, lo, hi, ROOT_TOL * gamma)?;
    let c_at_l = value_at(length, c0, alpha)?.ok_or_else(|| {
        Error::Discretization(format!("profile with c0 = {c0} blows up before x = {length}"))
    })?;
    Ok(OracleProfile {
        alpha,
        gamma,
        g_right,
        half_length: length,
        c0,
        c_at_l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.3, 0.3).unwrap(), 0.0);
        assert!((phi(1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(phi(0.1, 0.2).is_err());
    }

    #[test]
    fn phi_derivative_is_c_exp_c() {
        let c0 = 0.2;
        for c in [0.3, 0.7, 1.5] {
            let eps = 1e-5;
            let fd = (phi(c + eps, c0).unwrap() - phi(c - eps, c0).unwrap()) / (2.0 * eps);
            assert!((fd - c * f64::exp(c)).abs() < 1e-8, "{fd}");
        }
    }

    #[test]
    fn position_basics() {
        assert_eq!(position_of(0.4, 0.4, 1.0).unwrap(), 0.0);
        let xs: Vec<f64> = [0.41, 0.5, 0.8, 1.2]
            .iter()
            .map(|&c| position_of(c, 0.4, 2.0).unwrap())
            .collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        assert!(position_of(0.3, 0.4, 1.0).is_err());
        assert!(position_of(0.5, 0.0, 1.0).is_err());
    }

    /// Classical RK4 for `c″ = α c e^c`, `c(0) = c₀`, `c′(0) = 0`.
    fn rk4_profile(c0: f64, alpha: f64, x_end: f64, steps: usize) -> Vec<(f64, f64)> {
        let f = |y: [f64; 2]| [y[1], alpha * y[0] * y[0].exp()];
        let h = x_end / steps as f64;
        let mut y = [c0, 0.0];
        let mut out = vec![(0.0, c0)];
        for k in 0..steps {
            let k1 = f(y);
            let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
            let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
            let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
            y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
            y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
            out.push(((k + 1) as f64 * h, y[0]));
        }
        out
    }

    #[test]
    fn position_agrees_with_ode_integration() {
        let (c0, alpha) = (0.35, 1.7);
        let profile = rk4_profile(c0, alpha, 1.0, 20_000);
        for &(x, c) in profile.iter().step_by(2_000).skip(1) {
            let pos = position_of(c, c0, alpha).unwrap();
            assert!((pos - x).abs() < 1e-7, "x = {x}: {pos}");
        }
    }

    #[test]
    fn oracle_satisfies_closure() {
        let p = solve_oracle(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(p.c0 > 0.0 && p.c0 <= p.c_at_l && p.c_at_l < 1.0);
        assert!(p.closure_defect().unwrap().abs() < 1e-9);
        assert!((p.sample(1.0).unwrap() - p.c_at_l).abs() < 1e-12);
        assert_eq!(p.sample(0.0).unwrap(), p.c0);
        assert!(p.sample(1.5).is_err());
    }

    #[test]
    fn defect_changes_sign_and_is_monotone() {
        let sweep = defect_sweep(1.0, 1.0, 1.0, 1.0, 10).unwrap();
        let first = boundary_defect(1.0, 1.0, 1.0, 1.0, 1e-3).unwrap();
        assert!(first > 0.0);
        assert!(sweep.last().unwrap().1 < 0.0);
        if sweep.windows(2).any(|w| w[1].1 > w[0].1) {
            eprintln!("warning: boundary defect not monotone in c0 on sweep {sweep:?}");
        }
    }

    #[test]
    fn sampled_profile_is_convex() {
        let p = solve_oracle(1.0, 1.0, 1.0, 1.0).unwrap();
        let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let cs: Vec<f64> = xs.iter().map(|&x| p.sample(x).unwrap()).collect();
        for w in cs.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-12);
        }
    }

    #[test]
    fn dirichlet_limit() {
        let p = solve_oracle(1.0, 1e6, 1.0, 1.0).unwrap();
        assert!((p.c_at_l - 1.0).abs() <= 1e-4, "{}", p.c_at_l);
    }

    #[test]
    fn vanishing_alpha_limit() {
        let p = solve_oracle(1.0, 1.0, 1.0, 1e-8).unwrap();
        assert!((p.c0 - 1.0).abs() <= 1e-3, "{}", p.c0);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(solve_oracle(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(solve_oracle(1.0, 1.0, 1.0, 0.0).is_err());
    }
}
