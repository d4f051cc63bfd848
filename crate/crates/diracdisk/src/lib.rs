//! # diracdisk
//!
//! Spectral tools for the massless two-dimensional Dirac operator with
//! infinite-mass boundary conditions on a disk, and a solver for stationary
//! states of the associated Dirac-Hartree equation
//!
//! ```text
//! (D - omega) psi + kappa V(psi) psi = 0,   V(psi) = (-Delta)^(-1/2) |psi|^2,
//! ```
//!
//! where `(-Delta)^(-1/2)` is the inverse square root of the Dirichlet
//! Laplacian on the same disk.
//!
//! The disk geometry makes both eigenbases semi-analytic (Bessel functions),
//! which is what lets every layer of the crate be verified against an
//! independent oracle:
//!
//! - [`specialfun`] evaluates `J_m` and finds the secular roots that encode
//!   the boundary condition;
//! - [`basis`] assembles truncated Dirac and Dirichlet eigenbases together
//!   with the quadrature grid and the coefficient/grid transforms;
//! - [`operators`] realises the Dirac operator, the Hartree potential, the
//!   action functional with its gradient, residual and Jacobian, and the
//!   spectral splitting;
//! - [`solver`] finds stationary solutions branch by branch (damped Newton
//!   with gauge fixing, optional saddle flow, deflation) and stacks them
//!   into a ladder of distinct critical points;
//! - [`verify`] binds each checkable claim to a pass/fail record;
//! - [`config`] and [`io`] carry the reproducible-run plumbing used by the
//!   `diracdisk` binary.
//!
//! The `examples/` directory has one runnable program per capability; the
//! thin `diracdisk` binary exposes the same functionality as subcommands.

pub mod basis;
pub mod config;
pub mod io;
pub mod operators;
pub mod solver;
pub mod specialfun;
pub mod verify;

pub use basis::{build_basis, BasisSet, Domain, LatticeParameter, QuadGrid, Truncation};
pub use operators::{ProblemParams, ScalarField, SpinorState};
pub use solver::{Solution, SolverOptions};
