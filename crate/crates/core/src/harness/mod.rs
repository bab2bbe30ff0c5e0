//! Monte-Carlo sweeps over the power budget or the covertness tolerance,
//! with CSV and SVG output.

mod experiment;
mod plot;
mod table;

pub use experiment::{run_experiment, Aggregate, ExperimentSpec, ResultsTable, SweepAxis, TrialRecord};
pub use plot::{emit_plot, to_svg_string};
pub use table::{format_float, from_csv_str, read_csv, to_csv_string, write_csv};
