//! Sweeps, fits, phase diagrams and file formats on top of `varjac-core`.

pub mod error;
pub mod fit;
pub mod format;
pub mod phase;
pub mod sweep;

pub use error::{exit, HarnessError};
pub use fit::{fit_decay_exponent, least_squares, FitMethod, FitReport};
pub use format::{read_csv, read_json, read_sweep, write_csv, write_json, write_sweep, OutputFormat};
pub use phase::{classify_cell, phase_diagram, PhaseRow};
pub use sweep::{
    run_sweep, sweep_exit_code, verify_bounds, FailureKind, Route, RouteCell, RouteValue, RowFailure, SweepRow,
    SweepSpec,
};
