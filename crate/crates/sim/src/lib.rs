//! Monte Carlo sweeps over the relay optimizer.
//!
//! A [`SweepConfig`] names a sweep variable (transmit power budget or RSI
//! variance), the harvest thresholds and the schemes to compare. Each
//! `(sweep value, q_bar, scheme, realization)` combination becomes one
//! [`Row`]; results are written as CSV or JSON.

pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use config::{Scheme, SweepConfig, SweepKind};
pub use error::{SimError, SimResult};
pub use output::{emit, format_float, parse_csv, write_csv, write_json, OutputFormat, CSV_HEADER};
pub use sweep::{params_at, run_single, run_sweep, Row, SingleRun, Summary, SweepResult};
