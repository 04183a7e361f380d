//! Experiment sweeps, CSV persistence and the verification suite behind the
//! `antijam` command-line tool.

pub mod checks;
pub mod experiment;

pub use experiment::{
    parse_schemes, parse_values, read_csv, read_rows, run_experiment, write_csv, write_rows, ExperimentFile,
    ExperimentOutput, ExperimentSpec, HarnessError, ResultRow, Sweep, CSV_HEADER,
};
