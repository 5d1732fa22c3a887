//! Charge-constrained solitons and vortices of the nonlinear Klein–Gordon
//! (NLKG) and Klein–Gordon–Maxwell (KGM) equations.
//!
//! The crate computes standing waves `ψ(t,x) = u(x)e^{-iωt}` by minimizing the
//! energy on manifolds of fixed hylomorphic charge. The frequency is eliminated
//! in closed form from the charge constraint, so every solve is an
//! unconstrained descent over the profile `u` alone.
//!
//! Modules, bottom-up:
//!
//! - [`model`]: the nonlinearity `W(s) = ½m²s² + R(s)` and its structural checks.
//! - [`grid`]: radial finite-volume grid, quadrature and Laplacian.
//! - [`functionals`]: NLKG energy, charge, `J`, reduced energy and charge windows.
//! - [`gauge`]: electrostatic subproblem and the KGM reduced functionals.
//! - [`minimize`]: preconditioned gradient flow producing [`minimize::SolitonResult`].
//! - [`oracle`]: ODE shooting and closed-form tent quadratures used to cross-check.
//! - [`chargewin`]: admissible windows and the large-charge construction.
//! - [`vortex`]: axisymmetric vortices with winding `ℓ ≠ 0`.
//! - [`evolve`]: leapfrog evolution and solitary-wave diagnostics.
//! - [`cli`]: the `hylomorph` experiment runner.

// NaN must fail range checks, so `!(x > 0.0)` is intended throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod chargewin;
pub mod cli;
pub mod error;
pub mod evolve;
pub mod functionals;
pub mod gauge;
pub mod grid;
mod linalg;
pub mod minimize;
pub mod model;
pub mod oracle;
pub mod vortex;

pub use error::{Error, Result};
pub use grid::{RadialGrid, RadialProfile};
pub use model::NonlinearSpec;
