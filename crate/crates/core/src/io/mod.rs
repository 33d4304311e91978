//! File formats: PNML nets, trace files, Graphviz output and result CSV.

pub mod csv;
pub mod dot;
pub mod pnml;
pub mod traces;

pub use self::csv::{rows_to_string, write_rows, ResultRow};
pub use dot::{alignment_dot, process_dot};
pub use pnml::{parse_pnml, read_pnml, write_pnml, PnmlError};
pub use traces::{parse_traces, write_traces, TraceFileError};
