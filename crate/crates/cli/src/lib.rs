//! Command-line interface and HTTP service for the obdax engine.

pub mod cli;
pub mod ops;
pub mod report;
pub mod service;
