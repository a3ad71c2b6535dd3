//! File formats, the `H⁻²` dual-norm solver and the experiment drivers built
//! on top of the `distcurv` core.

pub mod dualnorm;
pub mod error;
pub mod experiments;
pub mod io;

pub use error::{Error, Result};
