//! Experiment orchestration: configuration, instance generation, runs and
//! result tables.

pub mod config;
pub mod experiment;
pub mod generate;
pub mod table;

pub use config::{AlgorithmSpec, ExperimentConfig, GeneratorSpec, OpgdSettings, OracleName, Scheme, SolverName, StepName};
pub use experiment::{run_algorithm, run_experiment};
pub use generate::generate_anchored;
pub use table::{emit_csv, emit_summary, parse_csv, read_csv, ResultsTable, Row, CSV_HEADER};
