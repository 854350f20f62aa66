//! Corpus generators, verification campaigns and the `ergomax` command line.

pub mod campaign;
pub mod cli;
pub mod config;
pub mod generate;
