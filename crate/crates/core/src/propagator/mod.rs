//! Overflow-safe multipliers `exp(\int_s^t psi)` and the frequency-side
//! solution of `du/dt = psi(t, -i grad) u + f`, `u(0) = u0`.
//!
//! Nothing is clamped: modes whose magnitude leaves the `f64` range are kept
//! in [`LogComplex`] form and flagged in the snapshot's `overflowed` mask.

mod kernel;
mod logcomplex;
mod problem;
mod solve;
mod trajectory;

pub use kernel::{apply_operator, kernel_snapshot, kernel_snapshot_with, multiplier, multiplier_field};
pub use logcomplex::{wrap_phase, LogComplex, MATERIALIZE_LIMIT};
pub use problem::{CauchyProblem, DuhamelSpec, Forcing, ForcingFn, TimeMesh, TimeRule, ZeroModePolicy};
pub use solve::solve;
pub use trajectory::{write_trajectory, Snapshot, SolutionTrajectory};

pub(crate) use solve::{eval_symbol, exponent};
