//! Command-line workbench: dataset and trace files, run manifests and reports.

mod cli;
mod config;
pub mod io;
mod summary;

pub use cli::{load_chain, run_cli, run_fit, OUT_DIR_ENV};
pub use config::{
    load_config_file, merge, AcceptanceRates, ChainRecord, Manifest, ModelKind, RunConfig, MANIFEST_FILE,
};
pub use summary::{summarize, write_summary, MeanSharing, Summary, TruthMetrics};

use crate::error::Error;

/// Process exit status for an error: 2 usage, 3 validation, 4 oracle check, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => 2,
        Error::Validation(_) | Error::Domain(_) | Error::Unsupported(_) | Error::Csv(_) | Error::Json(_) => 3,
        Error::Oracle(_) => 4,
        Error::Capacity(_) | Error::Invariant(_) | Error::Io(_) => 1,
    }
}
