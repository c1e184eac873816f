//! Command-line front end and human-evaluation service.

pub mod commands;
pub mod server;
