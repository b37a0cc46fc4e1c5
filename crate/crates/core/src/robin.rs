//! Linear Robin problems `(Δ − q) u = f` in Ω, `∂ν u + b u = φ` on ∂Ω.
//!
//! Cartesian grids use the five-point (three-point in 1D) Laplacian with the
//! Robin condition folded into boundary rows through a centered ghost node,
//! `u_ghost = u_inner − 2h (b u − φ)`. Radial grids use the conservative
//! form `r^{1−N} (r^{N−1} u')'` on dual cells `[r_{i−1/2}, r_{i+1/2}]`; at the
//! origin this reduces to `Δu(0) ≈ 2N (u₁ − u₀) / h²` and at `r = R` the
//! outer flux is taken from the boundary condition, which coincides with the
//! ghost-node row when `N = 1`.
//!
//! Every assembled matrix is an M-matrix: positive off-diagonals, row sums
//! `−q − κ b ≤ 0`, with `κ > 0` the boundary weight of each Robin node.

use crate::banded::{BandedLu, BandedMatrix};
use crate::domain::{DomainKind, Grid, ScalarField};
use crate::error::{Error, Result};

/// Relative residual tolerance of every linear solve.
pub const LINEAR_TOL: f64 = 1e-10;

const REFINEMENT_STEPS: usize = 3;

/// The `q`- and `b`-free part of the operator: Laplacian with homogeneous
/// Neumann rows plus, per boundary node, the weight `κ` multiplying `φ − b u`.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    pub(crate) laplacian: BandedMatrix,
    pub(crate) kappa: Vec<f64>,
}

/// Dual-cell volumes `∫ r^{N−1} dr` of a radial grid (without the sphere area).
pub(crate) fn radial_volumes(grid: &Grid, dimension: u32) -> Vec<f64> {
    let n = grid.len();
    let h = grid.spacing()[0];
    let nd = dimension as i32;
    let shell = |a: f64, b: f64| (b.powi(nd) - a.powi(nd)) / dimension as f64;
    (0..n)
        .map(|i| {
            let r = grid.node(i)[0];
            let lo = if i == 0 { 0.0 } else { r - 0.5 * h };
            let hi = if i + 1 == n { r } else { r + 0.5 * h };
            shell(lo, hi)
        })
        .collect()
}

pub(crate) fn stencil(grid: &Grid) -> Stencil {
    let n = grid.len();
    let [nx, _] = grid.shape();
    let [hx, hy] = grid.spacing();
    let mut kappa = vec![0.0; grid.boundary().len()];

    match grid.domain().kind() {
        DomainKind::Interval { .. } => {
            let mut a = BandedMatrix::zeros(n, 1, 1);
            let c = 1.0 / (hx * hx);
            for i in 0..n {
                if i == 0 {
                    a.add(0, 1, 2.0 * c);
                    a.add(0, 0, -2.0 * c);
                } else if i + 1 == n {
                    a.add(i, i - 1, 2.0 * c);
                    a.add(i, i, -2.0 * c);
                } else {
                    a.add(i, i - 1, c);
                    a.add(i, i + 1, c);
                    a.add(i, i, -2.0 * c);
                }
            }
            kappa.fill(2.0 / hx);
            Stencil { laplacian: a, kappa }
        }
        DomainKind::RadialBall { dimension, radius } => {
            let mut a = BandedMatrix::zeros(n, 1, 1);
            let vol = radial_volumes(grid, dimension);
            let nd = dimension as i32 - 1;
            for i in 0..n {
                let r = grid.node(i)[0];
                if i + 1 < n {
                    let flux = (r + 0.5 * hx).powi(nd) / hx / vol[i];
                    a.add(i, i + 1, flux);
                    a.add(i, i, -flux);
                }
                if i > 0 {
                    let flux = (r - 0.5 * hx).powi(nd) / hx / vol[i];
                    a.add(i, i - 1, flux);
                    a.add(i, i, -flux);
                }
            }
            kappa[0] = radius.powi(nd) / vol[n - 1];
            Stencil { laplacian: a, kappa }
        }
        DomainKind::Rectangle { .. } => {
            let mut a = BandedMatrix::zeros(n, nx, nx);
            let ny = grid.shape()[1];
            for j in 0..ny {
                for i in 0..nx {
                    let k = grid.index(i, j);
                    // x direction
                    let cx = 1.0 / (hx * hx);
                    if i == 0 {
                        a.add(k, k + 1, 2.0 * cx);
                    } else if i + 1 == nx {
                        a.add(k, k - 1, 2.0 * cx);
                    } else {
                        a.add(k, k - 1, cx);
                        a.add(k, k + 1, cx);
                    }
                    a.add(k, k, -2.0 * cx);
                    // y direction
                    let cy = 1.0 / (hy * hy);
                    if j == 0 {
                        a.add(k, k + nx, 2.0 * cy);
                    } else if j + 1 == ny {
                        a.add(k, k - nx, 2.0 * cy);
                    } else {
                        a.add(k, k - nx, cy);
                        a.add(k, k + nx, cy);
                    }
                    a.add(k, k, -2.0 * cy);
                }
            }
            for (slot, node) in kappa.iter_mut().zip(grid.boundary()) {
                *slot = node
                    .faces
                    .iter()
                    .map(|f| 2.0 / grid.spacing()[f.axis])
                    .sum();
            }
            Stencil { laplacian: a, kappa }
        }
    }
}

/// Assembled and factored discrete Robin operator on one grid.
#[derive(Debug, Clone)]
pub struct RobinOperator<'g> {
    grid: &'g Grid,
    matrix: BandedMatrix,
    lu: BandedLu,
    kappa: Vec<f64>,
}

/// Assembles `(Δ_h − q)` with Robin coefficient `b` (one value per boundary
/// node) and factors it.
pub fn assemble<'g>(grid: &'g Grid, q: &ScalarField, b: &[f64]) -> Result<RobinOperator<'g>> {
    grid.check_field(q)?;
    grid.check_boundary_values(b)?;
    if let Some(v) = q.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Domain(format!("zeroth-order coefficient must be nonnegative, got {v}")));
    }
    if let Some(v) = b.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Domain(format!("Robin coefficient must be nonnegative, got {v}")));
    }
    if q.iter().all(|&v| v == 0.0) && b.iter().all(|&v| v == 0.0) {
        return Err(Error::SingularOperator);
    }

    let Stencil { laplacian: mut matrix, kappa } = stencil(grid);
    for (i, &qi) in q.iter().enumerate() {
        matrix.add(i, i, -qi);
    }
    for ((node, &k), &bi) in grid.boundary().iter().zip(&kappa).zip(b) {
        matrix.add(node.index, node.index, -k * bi);
    }
    let lu = matrix
        .clone()
        .factor()
        .ok_or(Error::SingularOperator)?;
    Ok(RobinOperator { grid, matrix, lu, kappa })
}

impl<'g> RobinOperator<'g> {
    pub fn grid(&self) -> &'g Grid {
        self.grid
    }

    pub fn matrix(&self) -> &BandedMatrix {
        &self.matrix
    }

    /// Right-hand side vector of the discrete system for data `(f, φ)`.
    pub fn rhs(&self, f: &ScalarField, phi: &[f64]) -> Result<Vec<f64>> {
        self.grid.check_field(f)?;
        self.grid.check_boundary_values(phi)?;
        let mut rhs = f.values().to_vec();
        for ((node, &k), &p) in self.grid.boundary().iter().zip(&self.kappa).zip(phi) {
            rhs[node.index] -= k * p;
        }
        Ok(rhs)
    }

    /// Matrix-vector product `A u`.
    pub fn apply(&self, u: &ScalarField) -> Result<ScalarField> {
        self.grid.check_field(u)?;
        Ok(ScalarField::from_vec(self.matrix.mul_vec(u.values())))
    }

    /// Solves the problem with interior data `f` and boundary data `φ`.
    pub fn solve(&self, f: &ScalarField, phi: &[f64]) -> Result<ScalarField> {
        let rhs = self.rhs(f, phi)?;
        self.solve_system(&rhs)
    }

    /// Solves `A u = rhs` for an already assembled right-hand side, with
    /// iterative refinement until the residual meets [`LINEAR_TOL`].
    pub fn solve_system(&self, rhs: &[f64]) -> Result<ScalarField> {
        if rhs.len() != self.grid.len() {
            return Err(Error::Mismatch {
                expected: self.grid.len(),
                found: rhs.len(),
            });
        }
        let rhs_norm = sup(rhs);
        let mut u = self.lu.solve(rhs);
        let mut residual = 0.0;
        let mut tolerance = 0.0;
        for _ in 0..=REFINEMENT_STEPS {
            let au = self.matrix.mul_vec(&u);
            let r: Vec<f64> = rhs.iter().zip(&au).map(|(b, a)| b - a).collect();
            residual = sup(&r);
            // rounding floor of the product itself
            let floor = 64.0 * f64::EPSILON * sup(&self.matrix.abs_mul_vec(&u));
            tolerance = LINEAR_TOL * rhs_norm + floor;
            if !residual.is_finite() {
                break;
            }
            if residual <= tolerance {
                return Ok(ScalarField::from_vec(u));
            }
            let du = self.lu.solve(&r);
            u.iter_mut().zip(du).for_each(|(a, d)| *a += d);
        }
        Err(Error::LinearSolve { residual, tolerance })
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Convenience wrapper: assemble and solve in one call.
pub fn solve_robin(
    grid: &Grid,
    q: &ScalarField,
    b: &[f64],
    f: &ScalarField,
    phi: &[f64],
) -> Result<ScalarField> {
    assemble(grid, q, b)?.solve(f, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_grid, DomainSpec};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn interval(n: usize) -> Grid {
        build_grid(DomainSpec::interval(1.0).unwrap(), n).unwrap()
    }

    #[test]
    fn neumann_with_reaction_is_solvable() {
        let grid = interval(21);
        let q = ScalarField::constant(&grid, 1.0);
        let op = assemble(&grid, &q, &[0.0, 0.0]).unwrap();
        let u = op
            .solve(&ScalarField::constant(&grid, -2.0), &[0.0, 0.0])
            .unwrap();
        // u'' − u = −2 with Neumann ends: u ≡ 2
        for v in u.iter() {
            assert!((v - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_neumann_laplacian_refused() {
        let grid = interval(21);
        let q = ScalarField::zeros(&grid);
        assert!(matches!(assemble(&grid, &q, &[0.0, 0.0]), Err(Error::SingularOperator)));
    }

    #[test]
    fn negative_coefficients_refused() {
        let grid = interval(21);
        let mut q = ScalarField::zeros(&grid);
        q[3] = -1.0;
        assert!(matches!(assemble(&grid, &q, &[1.0, 1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn constants_solve_harmonic_robin_ball() {
        let grid = build_grid(DomainSpec::ball(3, 1.0).unwrap(), 101).unwrap();
        let gamma = 0.7;
        let u = solve_robin(
            &grid,
            &ScalarField::zeros(&grid),
            &[1.0],
            &ScalarField::zeros(&grid),
            &[gamma],
        )
        .unwrap();
        for v in u.iter() {
            assert!((v - gamma).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn homogeneous_data_gives_zero() {
        let grid = interval(33);
        let u = solve_robin(
            &grid,
            &ScalarField::constant(&grid, 2.0),
            &[1.0, 0.5],
            &ScalarField::zeros(&grid),
            &[0.0, 0.0],
        )
        .unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn barrier_problem_is_nonpositive() {
        let grid = build_grid(DomainSpec::ball(3, 1.0).unwrap(), 81).unwrap();
        let gamma: f64 = 1.0;
        let u = solve_robin(
            &grid,
            &ScalarField::zeros(&grid),
            &[1.0],
            &ScalarField::constant(&grid, gamma * gamma.exp()),
            &[0.0],
        )
        .unwrap();
        assert!(u.max() <= 0.0);
        assert!(u.min() < 0.0);
    }

    #[test]
    fn solve_is_deterministic() {
        let grid = build_grid(DomainSpec::rectangle(1.0, 2.0).unwrap(), 17).unwrap();
        let q = ScalarField::from_fn(&grid, |p| 1.0 + p[0]);
        let b: Vec<f64> = grid.boundary().iter().map(|n| n.normal[1].abs()).collect();
        let f = ScalarField::from_fn(&grid, |p| (p[0] * p[1]).sin());
        let phi = vec![0.3; b.len()];
        let u1 = solve_robin(&grid, &q, &b, &f, &phi).unwrap();
        let u2 = solve_robin(&grid, &q, &b, &f, &phi).unwrap();
        assert_eq!(u1, u2);
    }

    /// Sup-norm errors against a manufactured solution on successive halvings.
    fn mms_errors(
        domain: DomainSpec,
        base: usize,
        levels: usize,
        exact: impl Fn([f64; 2]) -> f64,
        source: impl Fn([f64; 2]) -> f64,
        q: impl Fn([f64; 2]) -> f64,
        b: f64,
        phi: impl Fn([f64; 2]) -> f64,
    ) -> Vec<f64> {
        let mut grid = build_grid(domain, base).unwrap();
        let mut errs = Vec::new();
        for _ in 0..levels {
            let qf = ScalarField::from_fn(&grid, &q);
            let f = ScalarField::from_fn(&grid, |p| source(p) - q(p) * exact(p));
            let bv = vec![b; grid.boundary().len()];
            let phiv: Vec<f64> = grid.boundary().iter().map(|n| phi(grid.node(n.index))).collect();
            let u = solve_robin(&grid, &qf, &bv, &f, &phiv).unwrap();
            let ex = ScalarField::from_fn(&grid, &exact);
            errs.push(u.max_abs_diff(&ex));
            grid = grid.refined().unwrap();
        }
        errs
    }

    fn assert_order_two(errs: &[f64]) {
        for w in errs.windows(2) {
            let p = (w[0] / w[1]).log2();
            assert!((1.9..=2.1).contains(&p), "orders from {errs:?}: {p}");
        }
    }

    #[test]
    fn mms_interval_cosine() {
        // u* = cos(πx), q = 1, b = 1: ∂νu* = 0 at both ends
        let errs = mms_errors(
            DomainSpec::interval(1.0).unwrap(),
            21,
            4,
            |p| (PI * p[0]).cos(),
            |p| -PI * PI * (PI * p[0]).cos(),
            |_| 1.0,
            1.0,
            |p| (PI * p[0]).cos(),
        );
        assert_order_two(&errs);
    }

    #[test]
    fn mms_radial_gaussian_growth() {
        // u* = exp(r²): Δu* = (2N + 4r²) exp(r²), ∂r u*(1) = 2e
        for dim in [1u32, 2, 3, 5] {
            let errs = mms_errors(
                DomainSpec::ball(dim, 1.0).unwrap(),
                21,
                4,
                |p| (p[0] * p[0]).exp(),
                |p| (2.0 * dim as f64 + 4.0 * p[0] * p[0]) * (p[0] * p[0]).exp(),
                |p| 1.0 + p[0],
                0.5,
                |_| 2.5 * 1f64.exp(),
            );
            assert_order_two(&errs);
        }
    }

    #[test]
    fn mms_rectangle() {
        // u* = cos(πx) cos(πy/2) + 1 on [0,1]×[0,2]: ∂νu* = 0 on every edge
        let errs = mms_errors(
            DomainSpec::rectangle(1.0, 2.0).unwrap(),
            11,
            4,
            |p| (PI * p[0]).cos() * (0.5 * PI * p[1]).cos() + 1.0,
            |p| -1.25 * PI * PI * (PI * p[0]).cos() * (0.5 * PI * p[1]).cos(),
            |p| 0.5 + p[1],
            2.0,
            |p| 2.0 * ((PI * p[0]).cos() * (0.5 * PI * p[1]).cos() + 1.0),
        );
        assert_order_two(&errs);
    }

    #[test]
    fn interior_rows_have_m_matrix_sign_pattern() {
        for domain in [
            DomainSpec::interval(1.0).unwrap(),
            DomainSpec::ball(4, 1.0).unwrap(),
            DomainSpec::rectangle(1.0, 1.0).unwrap(),
        ] {
            let grid = build_grid(domain, 12).unwrap();
            let q = ScalarField::from_fn(&grid, |p| p[0]);
            let b = vec![1.0; grid.boundary().len()];
            let op = assemble(&grid, &q, &b).unwrap();
            let a = op.matrix();
            for i in 0..grid.len() {
                let mut sum = 0.0;
                for j in a.row_span(i) {
                    let v = a.get(i, j);
                    if i != j {
                        assert!(v >= 0.0);
                    }
                    sum += v;
                }
                let scale = a.get(i, i).abs();
                assert!(sum <= 1e-12 * scale);
                if q[i] > 0.0 {
                    assert!(sum < 0.0);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn comparison_principle(
            qs in proptest::collection::vec(0.0f64..5.0, 16),
            fs in proptest::collection::vec(0.0f64..3.0, 16),
            b0 in 0.0f64..4.0,
            b1 in 0.1f64..4.0,
            phi0 in -2.0f64..=0.0,
            phi1 in -2.0f64..=0.0,
            radial in any::<bool>(),
        ) {
            let domain = if radial {
                DomainSpec::ball(3, 1.0).unwrap()
            } else {
                DomainSpec::interval(1.5).unwrap()
            };
            let grid = build_grid(domain, 16).unwrap();
            let q = ScalarField::from_vec(qs);
            let f = ScalarField::from_vec(fs);
            let (b, phi) = if radial { (vec![b1], vec![phi1]) } else { (vec![b0, b1], vec![phi0, phi1]) };
            let u = solve_robin(&grid, &q, &b, &f, &phi).unwrap();
            let scale = u.sup_norm().max(1e-300);
            prop_assert!(u.max() <= 1e-14 * scale, "max {}", u.max());
        }
    }
}
