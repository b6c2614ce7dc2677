//! Two-level Landau-Zener dynamics under a time-dependent dephasing Lindblad
//! generator, with three independently computed routes to the tunneling
//! probability: direct master-equation integration, finite-interval
//! quadrature, and the closed-form Q-function.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod formulas;
pub mod linalg2;
pub mod lindblad;
pub mod model;
pub mod odeint;
pub mod quad;
pub mod verify;

pub use error::Error;
pub use linalg2::{Mat2, HermMat2, C64};
pub use model::{GammaProfile, ModelParams, SpectralData};
