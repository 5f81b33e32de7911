use super::{SolverError, Trajectory};
use crate::autodiff::Scalar;

/// Trajectory values at `obs_times`: the node state when a time falls on a
/// grid node (within dt * 1e-9), otherwise linear interpolation between the
/// bracketing nodes.
pub fn read_at_observations<S: Scalar>(traj: &Trajectory<S>, obs_times: &[f64]) -> Result<Vec<Vec<S>>, SolverError> {
    let grid = traj.grid();
    let tol = grid.dt() * 1e-9;
    let (lo, hi) = (grid.t0(), grid.last());
    obs_times
        .iter()
        .map(|&t| {
            if !(t >= lo - tol && t <= hi + tol) {
                return Err(SolverError::OutOfRange { t, lo, hi });
            }
            let pos = (t - grid.t0()) / grid.dt();
            let nearest = (pos.round().max(0.0) as usize).min(grid.n_steps());
            if (t - grid.node(nearest)).abs() <= tol {
                return Ok(traj.state(nearest).to_vec());
            }
            let m = (pos.floor().max(0.0) as usize).min(grid.n_steps().saturating_sub(1));
            let w = (t - grid.node(m)) / grid.dt();
            let (a, b) = (traj.state(m), traj.state(m + 1));
            Ok(a.iter().zip(b).map(|(&x, &y)| x + (y - x) * x.lift(w)).collect())
        })
        .collect()
}
