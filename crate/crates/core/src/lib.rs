//! Bound-state spectra of one-dimensional and radial Schrödinger problems from
//! the exact phase quantization condition `J(E) = n + 1`.

pub mod error;
pub mod discretize;
pub mod numeric;
pub mod oracles;
pub mod phaseflow;
pub mod potential;
pub mod quantize;
pub mod tmatrix;

pub use error::{Error, Result};
pub use potential::{Centrifugal, DomainKind, Edge, Potential};
