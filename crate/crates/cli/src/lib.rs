//! Scene-file driver for the `isogeo` binary.

pub mod commands;
pub mod config;

pub use commands::{CliError, Format};
pub use config::{load_scene, Scene, SceneConfig};
