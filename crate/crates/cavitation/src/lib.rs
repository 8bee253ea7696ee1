//! Fourier-Chebyshev spectral computation of cavitation in 2-D nonlinear
//! elasticity.
//!
//! The crate solves the displacement boundary value problem of a
//! compressible hyperelastic annulus with a microscopic circular defect:
//! minimize the stored energy `int kappa |grad u|^p + h(det grad u)` over
//! orientation-preserving deformations with prescribed outer boundary
//! stretch. The deformation is expanded in a truncated Fourier series
//! circumferentially and Chebyshev series radially; the discrete
//! equilibrium equations are solved by a gradient phase followed by a
//! damped Broyden quasi-Newton iteration with a cascading tolerance
//! restart loop.
//!
//! Module map:
//! - [`basis`]: Chebyshev/Fourier primitives, quadrature, interpolation.
//! - [`model`]: material law, coordinate maps, pointwise kinematics.
//! - [`assembly`]: discrete energy, residual (the energy gradient), and
//!   the finite-difference Jacobian.
//! - [`solver`]: the combined gradient / damped quasi-Newton algorithm.
//! - [`oracle`]: independent radially-symmetric references.
//! - [`analysis`]: cavity geometry, convergence-model regression, sweeps.
//! - [`config`] and [`cli`]: experiment configuration and the command-line
//!   front end.
//!
//! See the `examples/` directory for runnable entry points covering each
//! capability, or use the `cavitation` binary (`solve`, `oracle`, `study`,
//! `fit` subcommands).

pub mod analysis;
pub mod assembly;
pub mod basis;
pub mod cli;
pub mod config;
pub mod error;
pub mod model;
pub mod oracle;
pub mod solver;

pub use crate::error::{Error, Inadmissible, Result};
