//! Distributional (densitized) curvature of piecewise polynomial Regge metrics.
//!
//! The crate works on affine simplicial meshes in two and three dimensions. A
//! metric is a symmetric 2-tensor field whose tangential-tangential trace is
//! continuous across facets. Its curvature is a functional made of element,
//! facet (jump of the second fundamental form) and bone (angle deficit)
//! contributions. The same machinery gives the linearization of that
//! functional and the probe functionals used to study convergence.
//!
//! Everything here is `no_std` with `alloc`; solvers, file formats and the
//! command line live in the companion `distcurv-cli` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod curvature;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod linearization;
pub mod manufactured;
pub mod mesh;
pub mod quadrature;
pub mod regge;
pub mod tensor;

pub use error::Error;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
