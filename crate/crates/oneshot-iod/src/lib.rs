//! Scenario files, Monte Carlo experiments, report files and the command
//! line for the `oneshot-core` estimator.

pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod report;
pub mod scenario_file;

pub use error::{AppError, Result};
pub use scenario_file::{load_scenario, write_scenario, Scenario, ScenarioFile};
