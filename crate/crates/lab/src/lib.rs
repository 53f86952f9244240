//! Experiments, report writers and the acceptance suite behind the
//! `embezzle-lab` binary.

pub mod cli;
pub mod commands;
pub mod report;
pub mod suite;
