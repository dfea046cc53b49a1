//! Library side of the `swarmx` command-line tool.

pub mod commands;
pub mod config;
pub mod svg;

pub use commands::{cmd_explain, cmd_plot, cmd_run, cmd_stats, CliError, ExplainMode, ExplainOptions};
pub use config::{CampaignSpec, GridChoice};
