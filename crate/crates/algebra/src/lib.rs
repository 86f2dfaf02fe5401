//! Exact symbolic algebra for a two-dimensional multiplicative stochastic
//! heat equation with rough forcing.
//!
//! The crate builds the finite symbol basis of the truncated model space,
//! the group of reexpansion maps between base points, the shift morphism
//! that moves the noise by a deterministic perturbation, and the
//! one-parameter renormalization group. All structural computations use
//! exact rational coefficients; floating point only enters through point
//! evaluations (characters) and assembled matrices.
//!
//! The crate is `no_std` (with `alloc`) so the symbolic layer can be reused
//! in constrained targets; IO and the numerics live in the companion crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod coproduct;
pub mod group;
pub mod identities;
pub mod params;
pub mod renorm;
pub mod symbols;
pub mod tplus;
pub mod translate;

pub use coproduct::{coproduct, Expansion};
pub use group::{gamma_apply_symbol, gamma_matrix, GammaMatrix};
pub use identities::{check_identities, IdentityCheck};
pub use params::{ParamError, StructureParams};
pub use renorm::{renorm_apply_exact, renorm_matrix, RenormMap};
pub use symbols::{enumerate_basis, parse_symbol, Basis, ParseError, Structure, Symbol};
pub use tplus::{Character, Mono, Poly, Rational};
pub use translate::{translate_mono, translate_symbol, LinComb};
