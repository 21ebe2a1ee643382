//! File formats, sweeps and reports around [`feasik_core`]: the JSON
//! problem/run document, the trace CSV, parallel parameter grids and the
//! certificate summaries used by the `feasik` binary.

pub mod config;
pub mod report;
pub mod sweep;
pub mod trace;

pub use config::{ConfigError, Document};
pub use sweep::{run_grid, GridConfig, SweepRow};
pub use trace::{read_trace, write_trace, TraceRow};
