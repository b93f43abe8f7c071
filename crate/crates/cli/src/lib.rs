//! Library side of the `hcrep` command-line tool.

pub mod error;
pub mod experiment;
pub mod io;

pub use error::CliError;
pub use experiment::{run, ExperimentSpec, Mode, RunOutput};
pub use io::{parse_state_file, parse_state_str, serialize_state};
