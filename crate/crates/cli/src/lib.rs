//! Scenario-driven command-line front end for `branchlab`.

pub mod commands;
pub mod output;
pub mod scenario;

pub use commands::{Command, Context, Outcome};
pub use scenario::{Diagnostic, Mode, Overrides, Scenario, Severity};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for an unreadable or invalid scenario.
pub const EXIT_INVALID: i32 = 1;
/// Exit status for a failure during the run itself.
pub const EXIT_RUNTIME: i32 = 2;
