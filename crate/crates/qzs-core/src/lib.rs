//! Equilibrium computation for two-player zero-sum games over density matrices.
//!
//! The crate provides the linear-algebra substrate (Hermitian matrices, partial
//! traces, eigendecomposition, spectraplex projections), the game layer (payoff
//! observable, superoperator pair, duality gap), two first-order solvers (an
//! accelerated smoothed-gap scheme with geometric accuracy reduction and an
//! optimistic projected gradient method), empirical sharpness diagnostics, and a
//! reduction from positive-map semidefinite programs to games.
//!
//! The crate is no_std-compatible (`--no-default-features`); only `alloc` and
//! scalar float math are required. Wall-clock time enters solvers through the
//! [`solver::Clock`] trait so traces stay reproducible under a null clock.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod game;
pub mod herm;
pub mod sdp;
pub mod smoothing;
pub mod solver;
pub mod spectraplex;
pub mod tol;
pub mod verify;

#[cfg(test)]
pub(crate) mod testutil;

pub(crate) mod num;

pub use error::Error;
