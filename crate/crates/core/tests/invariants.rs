use chemosteady_core::domain::{build_grid, BoundaryData, DomainSpec, Grid, ScalarField};
use chemosteady_core::mass::{alpha_bracket, mass_of_alpha};
use chemosteady_core::robin::solve_robin;
use chemosteady_core::scalar::{quotient_coefficient, solve_scalar, solve_scalar_from, ScalarSolveConfig};
use proptest::prelude::*;

fn geometry(kind: u8) -> Grid {
    let domain = match kind {
        0 => DomainSpec::interval(1.3).unwrap(),
        1 => DomainSpec::ball(2, 0.8).unwrap(),
        2 => DomainSpec::ball(3, 1.0).unwrap(),
        _ => DomainSpec::rectangle(1.0, 0.7).unwrap(),
    };
    build_grid(domain, if kind == 3 { 13 } else { 41 }).unwrap()
}

fn barrier(grid: &Grid, bd: &BoundaryData) -> ScalarField {
    let gamma = bd.gamma();
    solve_robin(
        grid,
        &ScalarField::zeros(grid),
        bd.g(),
        &ScalarField::constant(grid, gamma * gamma.exp()),
        &vec![0.0; grid.boundary().len()],
    )
    .unwrap()
}

fn boundary(grid: &Grid, gamma: f64, g_lo: f64, g_hi: f64) -> BoundaryData {
    BoundaryData::from_fn(grid, gamma, |node, _| if node.index % 2 == 0 { g_lo } else { g_hi }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solution_between_zero_and_gamma(
        kind in 0u8..4, alpha in 0.01f64..30.0, gamma in 0.1f64..3.0, g_lo in 0.0f64..5.0, g_hi in 0.1f64..5.0,
    ) {
        let grid = geometry(kind);
        let bd = boundary(&grid, gamma, g_lo, g_hi);
        let sol = solve_scalar(&grid, alpha, &bd, &ScalarSolveConfig::default()).unwrap();
        prop_assert!(sol.c.min() > 0.0);
        prop_assert!(sol.c.max() < gamma);
    }

    #[test]
    fn difference_quotient_sandwich_and_lipschitz(
        kind in 0u8..4, a1 in 0.05f64..10.0, ratio in 1.05f64..3.0, gamma in 0.2f64..2.0, g in 0.2f64..4.0,
    ) {
        let grid = geometry(kind);
        let bd = BoundaryData::constant(&grid, gamma, g).unwrap();
        let a2 = a1 * ratio;
        let cfg = ScalarSolveConfig::default();
        let c1 = solve_scalar(&grid, a1, &bd, &cfg).unwrap().c;
        let c2 = solve_scalar(&grid, a2, &bd, &cfg).unwrap().c;
        let wt = barrier(&grid, &bd);
        let w: Vec<f64> = (0..grid.len()).map(|i| (c2[i] - c1[i]) / (a2 - a1)).collect();
        for i in 0..grid.len() {
            prop_assert!(w[i] <= 1e-8 && w[i] >= wt[i] - 1e-8);
        }
        prop_assert!(c2.max_abs_diff(&c1) <= 2.0 * wt.sup_norm() * (a2 - a1));
    }

    #[test]
    fn restart_independent(kind in 0u8..4, alpha in 0.1f64..20.0, gamma in 0.2f64..2.0) {
        let grid = geometry(kind);
        let bd = BoundaryData::constant(&grid, gamma, 1.0).unwrap();
        let cfg = ScalarSolveConfig::default();
        let a = solve_scalar(&grid, alpha, &bd, &cfg).unwrap().c;
        let b = solve_scalar_from(&grid, alpha, &bd, &cfg, ScalarField::zeros(&grid)).unwrap().c;
        prop_assert!(a.max_abs_diff(&b) < 1e-8);
    }

    #[test]
    fn bracket_straddles_target(kind in 0u8..4, density in 0.01f64..50.0, gamma in 0.2f64..2.0) {
        let grid = geometry(kind);
        let bd = BoundaryData::constant(&grid, gamma, 1.0).unwrap();
        let m = density * grid.discrete_measure();
        let (lo, hi) = alpha_bracket(m, gamma, &grid);
        let cfg = ScalarSolveConfig::default();
        prop_assert!(mass_of_alpha(lo, &bd, &grid, &cfg).unwrap().mass <= m);
        prop_assert!(mass_of_alpha(hi, &bd, &grid, &cfg).unwrap().mass >= m);
    }
}

#[test]
fn discrete_difference_quotient_equation() {
    // (Δ - α1 h(c1, c2)) w = c2 e^{c2}, ∂ν w + g w = 0 holds exactly for the discrete solutions
    let grid = geometry(2);
    let bd = BoundaryData::constant(&grid, 1.2, 1.5).unwrap();
    let cfg = ScalarSolveConfig::default();
    let (a1, a2) = (1.0, 2.5);
    let c1 = solve_scalar(&grid, a1, &bd, &cfg).unwrap().c;
    let c2 = solve_scalar(&grid, a2, &bd, &cfg).unwrap().c;
    let q = ScalarField::from_vec((0..grid.len()).map(|i| quotient_coefficient(a1, c1[i], c2[i])).collect());
    let f = c2.map(|v| v * v.exp());
    let w = solve_robin(&grid, &q, bd.g(), &f, &vec![0.0; grid.boundary().len()]).unwrap();
    for i in 0..grid.len() {
        let direct = (c2[i] - c1[i]) / (a2 - a1);
        assert!((w[i] - direct).abs() < 1e-7, "node {i}: {} vs {direct}", w[i]);
    }
}
