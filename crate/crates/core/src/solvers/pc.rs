use super::weights::WeightTable;
use super::{check_dim, RhsFn, SolverError, TimeGrid, Trajectory};
use crate::autodiff::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PcOptions {
    /// Number of corrector evaluations per step (1 = PECE).
    pub corrector_passes: usize,
}

impl Default for PcOptions {
    fn default() -> Self {
        Self { corrector_passes: 1 }
    }
}

/// Solve the Caputo problem D^α y = f(t, y), y(t0) = y0 with the fractional
/// Adams-Bashforth-Moulton scheme on `grid`.
pub fn fde_solve_pc<S, R>(rhs: &R, alpha: S, y0: &[S], grid: &TimeGrid) -> Result<Trajectory<S>, SolverError>
where
    S: Scalar,
    R: RhsFn<S> + ?Sized,
{
    fde_solve_pc_with(rhs, alpha, y0, grid, PcOptions::default())
}

/// Dot product of `weights(k)` (lag k = n - j) with component `i` of the
/// stored history rows `j_from..=n`.
#[inline]
fn lagged_sum<S: Scalar>(
    history: &[S],
    dim: usize,
    i: usize,
    j_from: usize,
    n: usize,
    weights: &[S],
) -> Option<S> {
    let mut acc: Option<S> = None;
    for j in j_from..=n {
        let term = weights[n - j] * history[j * dim + i];
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    acc
}

pub fn fde_solve_pc_with<S, R>(
    rhs: &R,
    alpha: S,
    y0: &[S],
    grid: &TimeGrid,
    opts: PcOptions,
) -> Result<Trajectory<S>, SolverError>
where
    S: Scalar,
    R: RhsFn<S> + ?Sized,
{
    let a = alpha.value();
    if !(a > 0.0 && a <= 1.0) {
        return Err(SolverError::Domain { what: "alpha", value: a });
    }
    if opts.corrector_passes == 0 {
        return Err(SolverError::Domain { what: "corrector_passes", value: 0.0 });
    }
    let dim = rhs.dim();
    check_dim(y0, dim)?;
    let n_steps = grid.n_steps();
    let mut states: Vec<S> = Vec::with_capacity(grid.len() * dim);
    let mut history: Vec<S> = Vec::with_capacity(grid.len() * dim);
    states.extend_from_slice(y0);
    let f0 = rhs.eval(grid.t0(), y0)?;
    check_dim(&f0, dim)?;
    history.extend_from_slice(&f0);
    if n_steps == 0 {
        return Ok(Trajectory::from_parts(*grid, dim, states, history));
    }

    let table = WeightTable::new(alpha, grid.dt(), n_steps);
    let rect: Vec<S> = (0..n_steps).map(|k| table.rect(k)).collect();
    let trap: Vec<S> = (0..n_steps).map(|k| table.trap_mid(k)).collect();
    let one = alpha.lift(1.0);
    let inv_gamma = one / alpha.gamma();
    let trap_scale = alpha.base_pow(grid.dt()) / (alpha + one + one).gamma();

    let mut predicted = Vec::with_capacity(dim);
    let mut base = Vec::with_capacity(dim);
    let mut corrected = Vec::with_capacity(dim);
    for n in 0..n_steps {
        let t_next = grid.node(n + 1);

        predicted.clear();
        for i in 0..dim {
            let sum = lagged_sum(&history, dim, i, 0, n, &rect).expect("n >= 0 gives one term");
            predicted.push(y0[i] + inv_gamma * sum);
        }

        // History part of the corrector, shared by every corrector pass.
        let a_first = table.trap_first(n);
        base.clear();
        for i in 0..dim {
            let mut acc = a_first * history[i];
            if let Some(mid) = lagged_sum(&history, dim, i, 1, n, &trap) {
                acc = acc + mid;
            }
            base.push(acc);
        }

        let mut guess = predicted.clone();
        for _ in 0..opts.corrector_passes {
            let f_guess = rhs.eval(t_next, &guess)?;
            check_dim(&f_guess, dim)?;
            corrected.clear();
            for i in 0..dim {
                corrected.push(y0[i] + trap_scale * (base[i] + f_guess[i]));
            }
            guess.clone_from(&corrected);
        }
        if corrected.iter().any(|v| !v.value().is_finite()) {
            return Err(SolverError::NonFinite { step: n + 1 });
        }
        let f_next = rhs.eval(t_next, &corrected)?;
        check_dim(&f_next, dim)?;
        states.extend_from_slice(&corrected);
        history.extend_from_slice(&f_next);
    }
    Ok(Trajectory::from_parts(*grid, dim, states, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tape;
    use crate::numerics::{mittag_leffler, ToleranceSpec};
    use crate::solvers::rhs_fn;

    fn decay() -> impl RhsFn<f64> {
        rhs_fn(1, |_t: f64, y: &[f64]| vec![-y[0]])
    }

    /// Independent α = 1 oracle: rectangle-rule predictor and trapezoidal
    /// corrector applied to y(t) = y0 + ∫ f, with integer weights.
    fn cumulative_heun(f: impl Fn(f64) -> f64, y0: f64, dt: f64, n: usize) -> Vec<f64> {
        let mut ys = vec![y0];
        let mut fs = vec![f(y0)];
        for k in 0..n {
            let rect: f64 = fs.iter().sum();
            let pred = y0 + dt * rect;
            let trap: f64 = fs[0] + 2.0 * fs[1..].iter().sum::<f64>();
            let y = y0 + dt / 2.0 * (trap + f(pred));
            debug_assert_eq!(ys.len(), k + 1);
            ys.push(y);
            fs.push(f(y));
        }
        ys
    }

    #[test]
    fn zero_rhs_is_constant() {
        let rhs = rhs_fn(2, |_t: f64, _y: &[f64]| vec![0.0, 0.0]);
        for alpha in [0.3, 0.8, 1.0] {
            let grid = TimeGrid::new(0.0, 0.1, 30).unwrap();
            let traj = fde_solve_pc(&rhs, alpha, &[1.5, -2.0], &grid).unwrap();
            for m in 0..=30 {
                assert_eq!(traj.state(m), &[1.5, -2.0]);
            }
        }
    }

    #[test]
    fn alpha_one_decay_matches_exponential() {
        let grid = TimeGrid::new(0.0, 0.01, 100).unwrap();
        let traj = fde_solve_pc(&decay(), 1.0, &[1.0], &grid).unwrap();
        for m in 0..=100 {
            let err = (traj.state(m)[0] - (-grid.node(m)).exp()).abs();
            assert!(err < 1e-3);
        }
        assert!((traj.final_state()[0] - (-1.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn alpha_one_matches_cumulative_heun() {
        let grid = TimeGrid::new(0.0, 0.01, 100).unwrap();
        let traj = fde_solve_pc(&decay(), 1.0, &[1.0], &grid).unwrap();
        let oracle = cumulative_heun(|y| -y, 1.0, 0.01, 100);
        for m in 0..=100 {
            assert!((traj.state(m)[0] - oracle[m]).abs() < 1e-12, "step {m}");
        }
    }

    #[test]
    fn relaxation_half_order_matches_mittag_leffler() {
        let rhs = rhs_fn(1, |_t: f64, y: &[f64]| vec![1.0 - y[0]]);
        let grid = TimeGrid::new(0.0, 1.0 / 512.0, 512).unwrap();
        let traj = fde_solve_pc(&rhs, 0.5, &[0.3], &grid).unwrap();
        let exact = 1.0 - 0.7 * mittag_leffler(0.5, -1.0, ToleranceSpec::default()).unwrap();
        assert!((exact - 0.70069).abs() < 1e-5);
        assert!((traj.final_state()[0] - exact).abs() < 5e-3);
    }

    #[test]
    fn degenerate_grid_returns_initial_condition() {
        let grid = TimeGrid::new(0.0, 0.1, 0).unwrap();
        let traj = fde_solve_pc(&decay(), 0.5, &[2.0], &grid).unwrap();
        assert_eq!(traj.grid().len(), 1);
        assert_eq!(traj.state(0), &[2.0]);
        assert_eq!(traj.rhs(0), &[-2.0]);
    }

    #[test]
    fn errors() {
        let grid = TimeGrid::new(0.0, 0.1, 5).unwrap();
        assert!(matches!(fde_solve_pc(&decay(), 0.0, &[1.0], &grid), Err(SolverError::Domain { .. })));
        assert!(matches!(fde_solve_pc(&decay(), 1.01, &[1.0], &grid), Err(SolverError::Domain { .. })));
        assert!(matches!(fde_solve_pc(&decay(), 0.5, &[1.0, 2.0], &grid), Err(SolverError::Dimension { .. })));
        let blowup = rhs_fn(1, |_t: f64, y: &[f64]| vec![y[0] * y[0] * 1e200]);
        assert!(matches!(
            fde_solve_pc(&blowup, 0.9, &[10.0], &grid),
            Err(SolverError::NonFinite { step: 1 })
        ));
        let wrong = rhs_fn(1, |_t: f64, _y: &[f64]| vec![0.0, 0.0]);
        assert!(matches!(fde_solve_pc(&wrong, 0.5, &[1.0], &grid), Err(SolverError::Dimension { .. })));
    }

    #[test]
    fn history_perturbation_propagates_when_fractional() {
        // Adding a bump to f only on [t_2, t_3) changes every later state when α < 1,
        // and shifts all later states by the same constant when α = 1.
        let grid = TimeGrid::new(0.0, 0.1, 20).unwrap();
        let bumped = rhs_fn(1, |t: f64, _y: &[f64]| vec![if (0.15..0.25).contains(&t) { 1.0 } else { 0.0 }]);
        let flat = rhs_fn(1, |_t: f64, _y: &[f64]| vec![0.0]);
        for (alpha, expect_constant_shift) in [(0.6, false), (1.0, true)] {
            let a = fde_solve_pc(&bumped, alpha, &[0.0], &grid).unwrap();
            let b = fde_solve_pc(&flat, alpha, &[0.0], &grid).unwrap();
            let diffs: Vec<f64> = (3..=20).map(|m| a.state(m)[0] - b.state(m)[0]).collect();
            assert!(diffs.iter().all(|d| *d != 0.0));
            let constant = diffs.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-15);
            assert_eq!(constant, expect_constant_shift, "alpha {alpha}: {diffs:?}");
        }
    }

    #[test]
    fn taped_solve_is_bit_identical() {
        let grid = TimeGrid::new(0.0, 0.05, 40).unwrap();
        let plain = fde_solve_pc(&rhs_fn(1, |_t: f64, y: &[f64]| vec![1.0 - y[0] * y[0]]), 0.7, &[0.2], &grid)
            .unwrap();
        let tape = Tape::new();
        let alpha = tape.param(0.7);
        let y0 = [tape.constant(0.2)];
        let rhs = rhs_fn(1, |_t, y: &[crate::autodiff::Var]| {
            let one = y[0].lift(1.0);
            vec![one - y[0] * y[0]]
        });
        let taped = fde_solve_pc(&rhs, alpha, &y0, &grid).unwrap().to_values();
        for m in 0..=40 {
            assert_eq!(taped.state(m)[0].to_bits(), plain.state(m)[0].to_bits());
        }
    }

    #[test]
    fn extra_corrector_passes_stay_close() {
        let grid = TimeGrid::new(0.0, 0.01, 100).unwrap();
        let one = fde_solve_pc(&decay(), 0.8, &[1.0], &grid).unwrap();
        let three = fde_solve_pc_with(&decay(), 0.8, &[1.0], &grid, PcOptions { corrector_passes: 3 }).unwrap();
        assert!((one.final_state()[0] - three.final_state()[0]).abs() < 1e-3);
        assert!(fde_solve_pc_with(&decay(), 0.8, &[1.0], &grid, PcOptions { corrector_passes: 0 }).is_err());
    }
}
