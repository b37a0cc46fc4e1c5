use chemosteady_core::domain::{build_grid, BoundaryData, DomainSpec};
use chemosteady_core::oracle::solve_oracle;
use chemosteady_core::scalar::{solve_scalar, ScalarSolveConfig};

fn sup_error_vs_oracle(domain: DomainSpec, res: usize, centre: f64, g: f64, gamma: f64, alpha: f64, half: f64) -> f64 {
    let profile = solve_oracle(half, g, gamma, alpha).unwrap();
    let grid = build_grid(domain, res).unwrap();
    let bd = BoundaryData::constant(&grid, gamma, g).unwrap();
    let sol = solve_scalar(&grid, alpha, &bd, &ScalarSolveConfig::default()).unwrap();
    (0..grid.len())
        .map(|i| {
            let x = (grid.node(i)[0] - centre).abs();
            (sol.c[i] - profile.sample(x).unwrap()).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn unit_interval_matches_half_length_oracle() {
    let err = sup_error_vs_oracle(DomainSpec::interval(1.0).unwrap(), 1001, 0.5, 1.0, 1.0, 1.0, 0.5);
    assert!(err < 1e-6, "error {err:e}");
}

#[test]
fn one_dimensional_ball_matches_oracle() {
    // radial grid on [0, L] with a symmetry node at r = 0
    let e1 = sup_error_vs_oracle(DomainSpec::ball(1, 1.0).unwrap(), 401, 0.0, 2.0, 1.5, 3.0, 1.0);
    let e2 = sup_error_vs_oracle(DomainSpec::ball(1, 1.0).unwrap(), 801, 0.0, 2.0, 1.5, 3.0, 1.0);
    assert!(e2 < 1e-5, "error {e2:e}");
    let order = (e1 / e2).log2();
    assert!((1.9..=2.1).contains(&order), "order {order}");
}

#[test]
fn strong_consumption_profile() {
    let err = sup_error_vs_oracle(DomainSpec::interval(2.0).unwrap(), 2001, 1.0, 0.5, 2.0, 20.0, 1.0);
    assert!(err < 1e-4, "error {err:e}");
}
