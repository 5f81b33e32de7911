use neural_fde::numerics::{mittag_leffler, ToleranceSpec};
use neural_fde::solvers::{fde_solve_pc, ode_solve_euler, rhs_fn, TimeGrid};
use proptest::prelude::*;

fn relaxation_error(alpha: f64, y0: f64, dt: f64) -> f64 {
    let grid = TimeGrid::covering(0.0, 1.0, dt).unwrap();
    let rhs = rhs_fn(1, |_t, y: &[f64]| vec![1.0 - y[0]]);
    let traj = fde_solve_pc(&rhs, alpha, &[y0], &grid).unwrap();
    let exact = 1.0 + (y0 - 1.0) * mittag_leffler(alpha, -1.0, ToleranceSpec::default()).unwrap();
    (traj.final_state()[0] - exact).abs()
}

#[test]
fn pc_order_on_relaxation() {
    for alpha in [0.3, 0.5, 0.7, 0.9] {
        let e1 = relaxation_error(alpha, 0.3, 1.0 / 128.0);
        let e2 = relaxation_error(alpha, 0.3, 1.0 / 256.0);
        let order = (e1 / e2).log2();
        assert!(order >= 1.0 && order <= (1.0 + alpha).min(2.0) + 0.4, "α={alpha}: order {order}");
    }
}

#[test]
fn euler_is_first_order() {
    let err = |dt: f64| {
        let grid = TimeGrid::covering(0.0, 1.0, dt).unwrap();
        let rhs = rhs_fn(1, |_t, y: &[f64]| vec![-y[0]]);
        (ode_solve_euler(&rhs, &[1.0], &grid).unwrap().final_state()[0] - (-1f64).exp()).abs()
    };
    let order = (err(0.01) / err(0.005)).log2();
    assert!((order - 1.0).abs() < 0.05, "{order}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Relaxation toward 1 from below stays below 1 and increases.
    #[test]
    fn relaxation_is_monotone(alpha in 0.2f64..1.0, y0 in -2.0f64..0.9) {
        let grid = TimeGrid::covering(0.0, 3.0, 0.05).unwrap();
        let rhs = rhs_fn(1, |_t, y: &[f64]| vec![1.0 - y[0]]);
        let traj = fde_solve_pc(&rhs, alpha, &[y0], &grid).unwrap();
        for m in 1..grid.len() {
            prop_assert!(traj.state(m)[0] >= traj.state(m - 1)[0] - 1e-12);
            prop_assert!(traj.state(m)[0] < 1.0);
        }
    }

    // A constant right-hand side integrates exactly: y(t) = y0 + c t^α / Γ(α+1).
    #[test]
    fn constant_forcing_is_exact(alpha in 0.1f64..1.0, c in -3.0f64..3.0) {
        let grid = TimeGrid::covering(0.0, 2.0, 0.1).unwrap();
        let rhs = rhs_fn(1, move |_t, _y: &[f64]| vec![c]);
        let traj = fde_solve_pc(&rhs, alpha, &[0.5], &grid).unwrap();
        let g = neural_fde::numerics::gamma(alpha + 1.0).unwrap();
        for m in 0..grid.len() {
            let exact = 0.5 + c * grid.node(m).powf(alpha) / g;
            prop_assert!((traj.state(m)[0] - exact).abs() <= 1e-10 * (1.0 + exact.abs()));
        }
    }
}
