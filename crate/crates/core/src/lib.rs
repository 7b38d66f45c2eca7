//! Loop equations of matrix models and their contour-integral solutions.
//!
//! The crate is organised bottom-up:
//!
//! - [`symcore`]: exact Gaussian-rational arithmetic, partitions and
//!   symmetric polynomials in the power-sum basis.
//! - [`loopgen`]: the loop-equation polynomials `Q_mu` for polynomial,
//!   rational and two-matrix potentials.
//! - [`momsolve`]: reduction of any moment `E(p_mu)` to the finite basis
//!   of partitions fitting in an `N x (d-1)` box.
//! - [`contours`]: admissible integration arcs and homology classes.
//! - [`quad`]: numerical eigenvalue integrals over homology classes.
//! - [`wick`]: Gaussian Wick pairings and map generating series.
//! - [`discrim`]: saddle-point discriminating polynomials.

pub mod contours;
pub mod discrim;
pub mod error;
pub mod loopgen;
pub mod momsolve;
pub mod poly;
pub mod quad;
pub mod symcore;
pub mod wick;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
