//! Pure eigenstates for linear combinations of free group generators.
//!
//! Let `u_1, ..., u_n` generate a free group and fix positive coefficients
//! `c` together with an eigenvalue `lambda` in the open interval
//! `2 max c_i^2 - sum c_i^2 < lambda^2 < sum c_i^2`. This crate builds the
//! positive definite function `phi` on the group whose GNS representation
//! makes `sum c_i u_i` admit `lambda` as an eigenvalue, and verifies the
//! algebraic identities that construction rests on:
//!
//! * [`words`]: reduced words and the letter statistics entering `phi`.
//! * [`smap`]: the coordinate map `S` on the positive orthant, its Jacobian
//!   determinant identities, and residual-validated inversion.
//! * [`eigenstate`]: state parameters, the product formula for `phi`, Gram
//!   matrix positivity certificates, and spectral annuli.
//! * [`boundary`]: the Markov measure on the boundary, the multiplicative
//!   cocycle `P`, and exact cylinder-sum integration reproducing `phi`.
//! * [`spectral`]: group algebra convolution, power norms, and truncated
//!   geometric inverses.

#![forbid(unsafe_code)]

pub mod boundary;
pub mod error;
pub mod eigenstate;
pub mod smap;
pub mod spectral;
pub mod words;

pub use error::{Error, Result};
