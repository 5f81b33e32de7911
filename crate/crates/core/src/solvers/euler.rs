use super::{check_dim, RhsFn, SolverError, TimeGrid, Trajectory};
use crate::autodiff::Scalar;

/// Explicit Euler: y_{m+1} = y_m + dt f(t_m, y_m).
pub fn ode_solve_euler<S, R>(rhs: &R, y0: &[S], grid: &TimeGrid) -> Result<Trajectory<S>, SolverError>
where
    S: Scalar,
    R: RhsFn<S> + ?Sized,
{
    let dim = rhs.dim();
    check_dim(y0, dim)?;
    let mut states: Vec<S> = Vec::with_capacity(grid.len() * dim);
    let mut history: Vec<S> = Vec::with_capacity(grid.len() * dim);
    states.extend_from_slice(y0);
    let Some(first) = y0.first() else {
        return Ok(Trajectory::from_parts(*grid, dim, states, history));
    };
    let dt = first.lift(grid.dt());
    let mut current = y0.to_vec();
    for m in 0..grid.n_steps() {
        let f = rhs.eval(grid.node(m), &current)?;
        check_dim(&f, dim)?;
        for i in 0..dim {
            current[i] = current[i] + dt * f[i];
        }
        if current.iter().any(|v| !v.value().is_finite()) {
            return Err(SolverError::NonFinite { step: m + 1 });
        }
        history.extend_from_slice(&f);
        states.extend_from_slice(&current);
    }
    let f_last = rhs.eval(grid.last(), &current)?;
    check_dim(&f_last, dim)?;
    history.extend_from_slice(&f_last);
    Ok(Trajectory::from_parts(*grid, dim, states, history))
}

/// Classical four-stage Runge-Kutta, used for accurate integer-order references.
pub fn ode_solve_rk4<R>(rhs: &R, y0: &[f64], grid: &TimeGrid) -> Result<Trajectory<f64>, SolverError>
where
    R: RhsFn<f64> + ?Sized,
{
    let dim = rhs.dim();
    check_dim(y0, dim)?;
    let h = grid.dt();
    let mut states = Vec::with_capacity(grid.len() * dim);
    let mut history = Vec::with_capacity(grid.len() * dim);
    states.extend_from_slice(y0);
    let mut y = y0.to_vec();
    let eval = |t: f64, y: &[f64]| -> Result<Vec<f64>, SolverError> {
        let f = rhs.eval(t, y)?;
        check_dim(&f, dim)?;
        Ok(f)
    };
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for m in 0..grid.n_steps() {
        let t = grid.node(m);
        let k1 = eval(t, &y)?;
        let k2 = eval(t + h / 2.0, &axpy(&y, &k1, h / 2.0))?;
        let k3 = eval(t + h / 2.0, &axpy(&y, &k2, h / 2.0))?;
        let k4 = eval(t + h, &axpy(&y, &k3, h))?;
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { step: m + 1 });
        }
        history.extend_from_slice(&k1);
        states.extend_from_slice(&y);
    }
    history.extend_from_slice(&eval(grid.last(), &y)?);
    Ok(Trajectory::from_parts(*grid, dim, states, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tape;
    use crate::solvers::rhs_fn;

    #[test]
    fn zero_rhs_is_constant() {
        let grid = TimeGrid::new(0.0, 0.1, 10).unwrap();
        let traj = ode_solve_euler(&rhs_fn(1, |_t: f64, _y: &[f64]| vec![0.0]), &[4.0], &grid).unwrap();
        assert!((0..=10).all(|m| traj.state(m) == [4.0]));
    }

    #[test]
    fn two_half_steps() {
        let grid = TimeGrid::new(0.0, 0.5, 2).unwrap();
        let traj = ode_solve_euler(&rhs_fn(1, |_t: f64, y: &[f64]| vec![-y[0]]), &[1.0], &grid).unwrap();
        assert_eq!(traj.final_state(), &[0.25]);
    }

    #[test]
    fn fine_decay_matches_exponential() {
        let grid = TimeGrid::new(0.0, 0.001, 1000).unwrap();
        let traj = ode_solve_euler(&rhs_fn(1, |_t: f64, y: &[f64]| vec![-y[0]]), &[1.0], &grid).unwrap();
        assert!((traj.final_state()[0] - (-1.0f64).exp()).abs() < 2e-4);
    }

    #[test]
    fn history_length_matches_states() {
        let grid = TimeGrid::new(0.0, 0.1, 7).unwrap();
        let traj = ode_solve_euler(&rhs_fn(1, |_t: f64, y: &[f64]| vec![-y[0]]), &[1.0], &grid).unwrap();
        assert_eq!(traj.rhs(7)[0], -traj.state(7)[0]);
    }

    #[test]
    fn taped_matches_plain() {
        let grid = TimeGrid::new(0.0, 0.1, 25).unwrap();
        let plain = ode_solve_euler(&rhs_fn(1, |_t: f64, y: &[f64]| vec![y[0].sin()]), &[0.5], &grid).unwrap();
        let tape = Tape::new();
        // sin is not on the tape; use tanh for both instead.
        let plain2 = ode_solve_euler(&rhs_fn(1, |_t: f64, y: &[f64]| vec![y[0].tanh()]), &[0.5], &grid).unwrap();
        let taped = ode_solve_euler(
            &rhs_fn(1, |_t, y| vec![crate::autodiff::Scalar::tanh(y[0])]),
            &[tape.param(0.5)],
            &grid,
        )
        .unwrap()
        .to_values();
        assert_ne!(plain.final_state(), plain2.final_state());
        assert_eq!(taped, plain2);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let rhs = rhs_fn(1, |_t: f64, y: &[f64]| vec![-y[0]]);
        let err = |n: usize| {
            let grid = TimeGrid::new(0.0, 1.0 / n as f64, n).unwrap();
            (ode_solve_rk4(&rhs, &[1.0], &grid).unwrap().final_state()[0] - (-1.0f64).exp()).abs()
        };
        let order = (err(10) / err(20)).log2();
        assert!((order - 4.0).abs() < 0.2, "{order}");
    }
}
