//! Molecular force-field energies and first-order minimizers.

pub mod energy;
pub mod linesearch;
pub mod model;
pub mod optimizers;
pub mod oracle;
pub mod real;
pub mod synthetic;
