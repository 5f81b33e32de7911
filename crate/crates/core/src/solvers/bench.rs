use std::time::{Duration, Instant};

use super::{fde_solve_pc, ode_solve_euler, rhs_fn, SolverError, TimeGrid};

/// Order of the fractional benchmark problem D^α y = -y.
pub const BENCH_ALPHA: f64 = 0.6;
pub const BENCH_SPAN: f64 = 20.0;
pub const BENCH_DEFAULT_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    PcFractional,
    Euler,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::PcFractional => "pc_fractional",
            SolverKind::Euler => "euler",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub solver: SolverKind,
    pub n_steps: usize,
    /// Mean and population standard deviation of one solve, in seconds.
    pub mean_s: f64,
    pub std_s: f64,
    /// Bytes held by the returned trajectory (states plus rhs history).
    pub storage_bytes: usize,
    /// Peak heap growth during one solve; `None` without the counting allocator.
    pub peak_alloc_bytes: Option<usize>,
}

/// Each timing sample repeats the solve until at least this much time has passed,
/// so that short solves are not dominated by clock resolution.
const MIN_SAMPLE: Duration = Duration::from_millis(20);

fn solve_once(kind: SolverKind, grid: &TimeGrid) -> Result<usize, SolverError> {
    let rhs = rhs_fn(1, |_t: f64, y: &[f64]| vec![-y[0]]);
    let traj = match kind {
        SolverKind::PcFractional => fde_solve_pc(&rhs, BENCH_ALPHA, &[1.0], grid)?,
        SolverKind::Euler => ode_solve_euler(&rhs, &[1.0], grid)?,
    };
    std::hint::black_box(traj.final_state());
    Ok(2 * grid.len() * traj.dim() * std::mem::size_of::<f64>())
}

fn time_batch(kind: SolverKind, grid: &TimeGrid, batch: usize) -> Result<f64, SolverError> {
    let start = Instant::now();
    for _ in 0..batch {
        solve_once(kind, grid)?;
    }
    Ok(start.elapsed().as_secs_f64() / batch as f64)
}

fn bench_one(kind: SolverKind, n_steps: usize, repeats: usize) -> Result<BenchRow, SolverError> {
    let grid = TimeGrid::new(0.0, BENCH_SPAN / n_steps as f64, n_steps)?;
    let (storage, peak) = crate::alloc::measure_peak(|| solve_once(kind, &grid));
    let storage_bytes = storage?;

    let mut batch = 1usize;
    loop {
        let start = Instant::now();
        for _ in 0..batch {
            solve_once(kind, &grid)?;
        }
        if start.elapsed() >= MIN_SAMPLE || batch >= 1 << 20 {
            break;
        }
        batch *= 2;
    }
    let samples = (0..repeats).map(|_| time_batch(kind, &grid, batch)).collect::<Result<Vec<_>, _>>()?;
    let mean_s = samples.iter().sum::<f64>() / samples.len() as f64;
    let var = samples.iter().map(|s| (s - mean_s).powi(2)).sum::<f64>() / samples.len() as f64;
    Ok(BenchRow { solver: kind, n_steps, mean_s, std_s: var.sqrt(), storage_bytes, peak_alloc_bytes: peak })
}

/// Time both solvers on the benchmark problems over [0, 20] for the default
/// grid of 100 steps plus each requested size.
pub fn benchmark_solvers(sizes: &[usize], repeats: usize) -> Result<Vec<BenchRow>, SolverError> {
    if repeats == 0 {
        return Err(SolverError::Domain { what: "repeats", value: 0.0 });
    }
    if let Some(&bad) = sizes.iter().find(|&&n| n == 0) {
        return Err(SolverError::Domain { what: "grid size", value: bad as f64 });
    }
    let mut all = vec![BENCH_DEFAULT_STEPS];
    all.extend_from_slice(sizes);
    all.sort_unstable();
    all.dedup();
    let mut rows = Vec::with_capacity(all.len() * 2);
    for &n in &all {
        for kind in [SolverKind::PcFractional, SolverKind::Euler] {
            rows.push(bench_one(kind, n, repeats)?);
        }
    }
    Ok(rows)
}
