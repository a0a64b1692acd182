//! Config-driven experiments: sweeps over N, caching, CSV tables and SVG plots.

pub mod cache;
pub mod config;
pub mod output;
pub mod plot;
pub mod presets;
pub mod runner;

pub use cache::Cache;
pub use config::{
    CacheSpec, ClassicalSpec, EgorovSpec, ExperimentConfig, ExperimentKind, MapSpec, ModeSpec, ObservableSpec, OffdiagSpec, OutputSpec,
    Tolerances, WindowSpec,
};
pub use output::{write_atomic, Table};
pub use plot::{Plot, Series};
pub use presets::{preset, PRESETS};
pub use runner::{read_table, run, run_task, Diagnostic, FitRecord, ResultRecord, RunOptions, Task};
