//! Batch minimization, energy ranking and rate benchmarks on top of
//! `ffmin-core`.

pub mod cli;
pub mod commands;
pub mod exit;
pub mod rmsd;
pub mod trace;
