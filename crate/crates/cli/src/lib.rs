//! Command-line front end for the `recalib` library: data and forecast
//! ingestion, model fitting, recalibration, diagnostics and inventory
//! simulation.
//!
//! Exit statuses: 0 success, 1 I/O failure, 2 invalid input or usage,
//! 3 numerical failure, 4 resource limit.

mod config;
mod error;
mod ingest;
mod model;
mod run;

pub use config::{Calibration, Cli, Command, Input, RunConfig};
pub use error::{CliError, CliResult};
pub use ingest::{forecast_row, ingest_dataset, ingest_demand_trace, ingest_forecasts, write_forecasts};
pub use model::{fit_model, Model, ModelDocument, ModelKind, ModelParams};
pub use run::{run, ReportDocument};
