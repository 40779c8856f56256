//! Serialized forms: exact rationals as strings, decimal renderings and
//! solver reports.

pub mod report;
pub mod rational;

pub use rational::{format_rational, parse_rational, to_decimal};
pub use report::{LevelReport, SolveReport, StatsReport, SCHEMA_VERSION};
