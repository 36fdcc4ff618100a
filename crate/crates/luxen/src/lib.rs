//! Server, command line and benchmark harness around `luxen-core`.

pub mod bench;
pub mod cli;
pub mod config;
pub mod load;
pub mod schedule;
pub mod server;
pub mod session;
pub mod wire;

pub use luxen_core as core;
