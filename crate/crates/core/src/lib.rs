//! Pseudo-spectral solver and verification harness for a generalized
//! Camassa-Holm family with dissipation and dispersion on a periodic
//! domain. The solver evolves the nonlocal velocity form of the equation;
//! the momentum form, a real-space kernel quadrature, Lagrangian
//! characteristics, and the exact decay/threshold/tail laws serve as
//! independent verification routes over it.

pub mod characteristics;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod initial;
pub mod interp;
pub mod model;
pub mod output;
pub mod run;
pub mod spectral;
pub mod verify;

pub use error::{GchError, Result};
pub use model::{classify_reduction, Field, Grid, ModelParams, Reduction, State};
pub use spectral::SpectralWorkspace;
