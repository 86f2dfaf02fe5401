//! Concrete side of the machinery: sampled fields on the torus, admissible
//! models, renormalized solvers and wavelet diagnostics.

pub mod analysis;
pub mod config;
pub mod fields;
pub mod formats;
pub mod kernel;
pub mod models;
pub mod quad;
pub mod solver;
pub mod wavelets;

pub use gpam_algebra as algebra;
