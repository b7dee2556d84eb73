//! Numerical workbench for the resource theory of translation asymmetry.
//!
//! Layers, bottom up: [`linalg`] (matrices, states, channels, systems),
//! [`symmetry`] (translations, covariance, asymmetry measures), [`ki`]
//! (Koashi-Imoto decomposition), [`optimize`] (covariant channel optimization)
//! and [`experiments`] (verification suites).

pub mod error;
pub mod experiments;
pub mod ki;
pub mod linalg;
pub mod optimize;
pub mod symmetry;
pub mod tol;

pub use error::{Error, Result};
