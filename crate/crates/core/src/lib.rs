//! Finite-basis laboratory for the multiconfiguration Dirac-Fock (MCDF) model.
//!
//! Orbitals are expanded in periodic plane waves, where the free Dirac operator,
//! its spectral projectors and the Sobolev-type norms are exactly diagonal per
//! mode. Pointwise products (pair densities, potentials) are formed on a
//! real-space grid large enough that the Galerkin matrices are alias-free.
//!
//! The crate is organised bottom-up:
//!
//! - [`basis`]: plane-wave 4-spinor basis, Dirac operator, projectors, norms.
//! - [`grid`]: real-space product grid and the periodic Coulomb kernel.
//! - [`ci`]: determinant combinatorics, occupation matrices, group action.
//! - [`coulomb`]: nuclear attraction, mean-field matrix, Fock operator, CI matrix.
//! - [`energy`]: MCDF/MCHF energies, normalization, gradients, multipliers.
//! - [`solver`]: min-max solver (inner concave maximization, outer minimization).
//! - [`mchf`]: nonrelativistic reference minimizer and full-CI oracle.
//! - [`limit`]: light-speed sweeps and nonrelativistic-limit diagnostics.
//! - [`config`], [`report`], [`run`]: run configuration, result documents, drivers.
//! - [`check`]: invariant suite used by the `check` command.

// `!(x > 0.0)` is used on purpose so that NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod check;
pub mod ci;
pub mod config;
pub mod coulomb;
pub mod energy;
mod error;
pub mod grid;
pub mod limit;
pub mod linalg;
pub mod mchf;
pub mod optim;
pub mod oracle;
pub mod report;
pub mod run;
pub mod solver;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix (orbital sets are stored column-wise).
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVec = nalgebra::DVector<C64>;
