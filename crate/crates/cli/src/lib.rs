//! Command-line front end and HTTP service for the stratcheck model checker.

pub mod ops;
pub mod server;
pub mod store;
