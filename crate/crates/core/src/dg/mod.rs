//! The upwind dG method: discrete functions, assembly, solvers, norms.

pub mod assembly;
pub mod function;
pub mod norm;
pub mod solve;
pub mod system;

pub use assembly::{assemble, assemble_operator, assemble_rhs, DGSystem, DEFAULT_QUAD_OFFSET};
pub use function::{BrokenField, DGFunction, Difference, SmoothField, SolutionExport};
pub use norm::{bilinear_value, compute_error, compute_error_with, dg_norm, ErrorReport, NormReport};
pub use solve::{downwind_order, downwind_sweep_solve, relative_residual, solve};
pub use system::BlockSparseMatrix;
