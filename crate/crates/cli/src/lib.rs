//! Scenario front end for the SPDC tilt engine: configuration parsing,
//! the analysis pipeline, and file emission.

pub mod output;
pub mod pipeline;
pub mod scenario;

pub use pipeline::{run, sweep, CliError, RunReport, SweepParameter};
pub use scenario::{parse_scenario, render, Analysis, Scenario, TiltChoice};
