//! Run configuration, JSON reports and binary field dumps.

mod config;
mod dump;
mod report;

pub use config::{
    BentConfig, ContourConfig, DataKind, GridConfig, RBoundConfig, RunConfig, ScanConfig, SolveConfig, DEFAULT_TOLERANCES,
};
pub use dump::{read_dump, write_boundary, write_field, DumpMeta};
pub use report::{error_value, git_describe, to_json_17, Report, Verdict};
