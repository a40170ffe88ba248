//! Time steppers for partitioned systems.
//!
//! [`Stepper`] runs SPC, IPC and single-rate DIRK steps; [`integrate`] drives
//! it at a fixed macro step. Implicit stages use a simplified Newton
//! iteration on the full system; corrector ODEs go to [`inner_solve`].

mod driver;
mod inner;
mod newton;
mod steppers;
mod system;

pub use driver::{integrate, step_count, step_method, IntegrateOptions, Trajectory};
pub use inner::{inner_solve, FnInner, InnerMode, InnerRhs, InnerSolverConfig, InnerStats};
pub use newton::{newton_solve_stage, LinearizedSolve, NewtonOptions};
pub use steppers::{dirk_step, ipc_step, spc_step, StepConfig, StepResult, StepStats, Stepper};
pub use system::{FnSystem, LinearSplit, PartitionedSystem};
