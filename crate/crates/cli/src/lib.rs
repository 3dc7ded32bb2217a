//! Batch front end: runs the checks of a scenario file and reports on them.

pub mod config;
pub mod expr;
pub mod report;
pub mod runner;

pub use config::{ConfigError, Scenario};
pub use expr::{parse_expr, Expr, ParseError};
pub use report::{CheckRecord, Report, Status};
pub use runner::{prepare, run_file, Prepared};
