//! Φ-distances between finite-rank multisets in based metric spaces,
//! continuous enumeration of sampled eigenvalue paths, and unitary spectral
//! flow computed both from winding numbers and from signed crossing counts.

pub mod assignment;
pub mod campaign;
pub mod enumeration;
pub mod error;
pub mod flow;
pub mod io;
pub mod multiset;
pub mod norms;
pub mod quotient;
pub mod space;
pub mod spectra;

pub use error::{Error, Result};
pub use multiset::Multiset;
pub use norms::NormSpec;
pub use quotient::CompactSet;
pub use space::BasedSpace;

/// Absolute tolerance for identifying points with the basepoint class and
/// for merging coincident locations.
pub const TOL_BASE: f64 = 1e-9;
