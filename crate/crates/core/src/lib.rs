//! Subdiffusion solver with pointwise-in-time a-posteriori error control.
//!
//! Solves `D_t^α u − u_xx = f` on `(0, x̄) × (0, T]` with homogeneous
//! Dirichlet data. Space is discretized with quadratic finite elements, time
//! with the L1, L1-2 or continuous collocation schemes, and the time mesh is
//! built adaptively so that the residual stays below a barrier that
//! guarantees a prescribed error.

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod basis;
pub mod bounds;
pub mod caputo;
pub mod error;
pub mod experiment;
pub mod expr;
pub mod fem;
pub mod method;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod residual;
pub mod special;
pub mod steppers;

pub use adaptive::{adapt_solve, evaluate_on_mesh, AdaptiveConfig, AdaptiveRun, RunReport};
pub use bounds::{bound_trace, inverse_fractional_operator, BoundTrace, Envelope};
pub use caputo::{EvalCounts, TimeSolution};
pub use error::{Error, Result};
pub use experiment::{execute, verify_report, ExperimentConfig, ExperimentReport, ExperimentSummary};
pub use fem::{SpatialDiscretization, SpatialNorm, SpatialVector};
pub use mesh::{graded_mesh, sampling_points, SamplingGrid, TemporalMesh};
pub use method::{MethodKind, MethodSpec};
pub use problem::{builtin_example1, builtin_example2, DiscreteProblem, ProblemSpec};
pub use special::{gamma, mittag_leffler_neg, stable_power_diff, MLParams};
pub use residual::{sample_residual, BarrierKind, BarrierSpec, ResidualSample};
pub use steppers::{residual_at_enforcement_points, solve_on_mesh, Stepper};
