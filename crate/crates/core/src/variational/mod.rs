//! Discretized energy of the weighted critical `p`-Laplace problem on the
//! unit ball, equivariant averaging, and Nehari-constrained descent.

mod functional;
mod grid;
mod laplace;
mod params;
mod profile;
mod solve;
mod symmetry;

pub use functional::{Functional, P_REGULARIZATION};
pub use grid::{Grid, GridField, SignCertificate, MAX_NODES};
pub use laplace::{apply_laplacian, solve_laplacian};
pub use params::ProblemParams;
pub use profile::{concentration_profile, ConcentrationRow};
pub use solve::{
    refinement_study, seed_field, solve, DescentOptions, IterationRecord, RefinementRow, RefinementStudy,
    SolveOptions, SolveReport, Solver, SolverState, MAX_SOLVER_DIM,
};
pub use symmetry::{interpolate, rotation_bias, FiniteSubgroup, SignedPermutation};
