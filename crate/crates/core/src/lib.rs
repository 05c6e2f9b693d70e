//! Upwind discontinuous Galerkin discretisation of the linear
//! convection–reaction problem `b·∇u + c u = f` on tensor-product meshes,
//! together with tools for measuring h- and p-convergence rates and the
//! terms of the a priori error analysis.

pub mod dg;
pub mod diagnostics;
pub mod error;
pub mod manufactured;
pub mod mesh;
pub mod problem;
pub mod projection;
pub mod quadrature;
pub mod rates;
pub mod reference;
pub mod study;
pub mod verify;

pub use dg::{
    assemble, assemble_operator, assemble_rhs, bilinear_value, compute_error, dg_norm, downwind_sweep_solve, solve,
    BrokenField, DGFunction, DGSystem, NormReport, SmoothField,
};
pub use diagnostics::{compute_t_terms, TTermReport};
pub use error::{DgError, Result};
pub use manufactured::{ManufacturedSolution, SolutionCatalog};
pub use mesh::{build_mesh, element_map, enumerate_faces, BoxDomain, ElementGeometry, Face, TensorMesh};
pub use problem::{
    check_well_posedness, classify_face_points, divergence, fichera, AxisFunction, ConvectionField, FieldCatalog,
    FieldClass, FlowLabel, ReactionData, WellPosednessReport,
};
pub use quadrature::{gauss_legendre, legendre_eval, tensor_basis_eval, QuadratureRule1D, TensorBasis};
pub use rates::{eoc, fit_loglog_slope};
pub use study::{run_h_study, run_p_study, run_study, Refinement, StudyConfig, StudyReport};
pub use verify::{run_verification_suite, VerifyOptions, VerifyReport};
