//! Discretization and analysis toolkit for the logarithmic Laplacian and
//! small-order fractional Laplacian on an interval with exterior Dirichlet
//! conditions.
//!
//! The crate assembles exact Galerkin matrices for the quadratic forms on
//! piecewise-constant functions (every kernel integral has a closed
//! antiderivative in one dimension), exposes the closed-form constants of
//! the theory, computes principal eigenpairs, minimizes the semilinear
//! energies with logarithmic and weighted power nonlinearities in their
//! superlinear and sublinear regimes, and verifies the identities,
//! inequalities, and small-order limits those solutions are predicted to
//! satisfy.
//!
//! Modules:
//! - [`grid`]: uniform midpoint grids and grid functions;
//! - [`forms`]: exact assembly of the mass, kernel, and operator forms;
//! - [`constants`]: closed-form constants and explicit bounds;
//! - [`spectral`]: principal eigenpairs of form pencils;
//! - [`problem`]: problem data and the one-parameter weight family;
//! - [`solve`]: energy minimization in both regimes;
//! - [`verify`]: identity, inequality, and asymptotics checks;
//! - [`special`]: the gamma-family special functions the constants need.

pub mod constants;
pub mod error;
pub mod forms;
pub mod grid;
pub mod matrix;
pub mod problem;
pub mod solve;
pub mod special;
pub mod spectral;
pub mod verify;

pub use constants::{dimension_constants, frac_constants, DimensionConstants, FracConstants};
pub use error::{Error, Result};
pub use forms::{
    assemble_far_field, assemble_fractional, assemble_log_kernel, assemble_log_laplacian,
    assemble_mass, FormKind, SymmetricForm,
};
pub use grid::{build_grid, DiscreteFunction, Grid1D};
pub use problem::{FracProblem, LogProblem, LogRegime, WeightFamily};
pub use solve::{
    solve_frac, solve_sublinear, solve_superlinear, SolveOpts, SolveReport,
};
pub use spectral::{smallest_eig, EigenPair};
pub use verify::CheckReport;
