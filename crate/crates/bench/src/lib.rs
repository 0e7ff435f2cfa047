//! Shared fixtures for the benchmarks.

use subdiff::{builtin_example1, graded_mesh, solve_on_mesh, DiscreteProblem, MethodSpec, Result, TimeSolution};

/// Example 1 solved on a graded mesh with `intervals` steps.
pub fn graded_solution(alpha: f64, method: MethodSpec, intervals: usize) -> Result<(DiscreteProblem, TimeSolution)> {
    let problem = DiscreteProblem::new(builtin_example1(alpha)?, 10)?;
    let grading = (method.nominal_order() as f64 - alpha) / alpha;
    let mesh = graded_mesh(intervals, grading.min(8.0), 1.0)?;
    let sol = solve_on_mesh(&problem, method, &mesh)?;
    Ok((problem, sol))
}
