//! Pseudospectral toolkit for the Choquard equation with an inverse-square
//! potential.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod functionals;
pub mod ground_state;
pub mod model;
pub mod params;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use model::Model;
pub use params::{CriticalExponents, ProblemParams, Regime};
pub use spectral::{Grid, Spectral, SpectralField};
