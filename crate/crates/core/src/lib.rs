//! Curvature of possibly degenerate Hermitian forms on holomorphic vector
//! bundles, computed chart by chart.

pub mod acceptance;
pub mod chart_calc;
pub mod fibration;
pub mod error;
pub mod herm_core;
pub mod jet;
pub mod json;
pub mod linalg;
pub mod models;
pub mod par;
pub mod sampling;
pub mod sequences;

pub use error::{Error, Result};
