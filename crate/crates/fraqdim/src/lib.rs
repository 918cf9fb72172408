//! Configuration, file formats and command-line driver around
//! [`fraqdim_core`].

pub mod commands;
pub mod config;
pub mod output;
pub mod pipeline;
pub mod verify;

pub use config::ExperimentConfig;
pub use pipeline::Experiment;
