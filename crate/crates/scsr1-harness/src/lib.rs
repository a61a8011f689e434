//! Verification and benchmark harness for the shape-changing SR1
//! subproblem solver: seeded generators for the six experiment classes,
//! result tables, problem snapshots, and the batch runner behind the
//! `scsr1` binary.

pub mod experiment;
pub mod rng;
pub mod run;
pub mod snapshot;
pub mod table;

pub use experiment::{generate, ExperimentSpec, ExperimentTag, GeneratedProblem};
pub use run::{run, scaled_gradient_sweep};
pub use table::{emit, parse_csv, OutputFormat, TableRow};
