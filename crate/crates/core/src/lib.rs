//! Numerical core for a running-average memory equation and its local limit.
//!
//! The memory equation evolves a vector `ξ(t) ∈ R^d` under a field that
//! depends on the running averages `(1/(hr)) ∫_{t-hr}^t ξ` for all
//! `r ∈ [0, t/h]`; the limit equation replaces that field with a surface
//! integral over the resonance sphere `|η - u| = |u|`. This crate holds the
//! Gaussian coupling profiles, the oscillatory and sphere quadratures, the two
//! time integrators and the bound checks. It is `no_std` and only needs
//! `alloc`; file formats and the command line live in the companion crate.

#![cfg_attr(not(test), no_std)]
// `!(x <= y)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod integrators;
pub mod limit_field;
pub mod oscillatory;
pub mod profiles;
pub mod quadrature;
pub mod vector;

pub use error::{Error, Result};
pub use integrators::{Scale, Solution, SolveStatus, SolverConfig, Trajectory};
pub use limit_field::{LimitField, SphereQuadSpec};
pub use oscillatory::{MemoryField, QuadratureSpec};
pub use profiles::{ConstantSet, Profile};
pub use vector::{Vector, MAX_DIM};
