//! Library surface of the CLI: config schema, command implementations,
//! output rendering, and the acceptance suite.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;
