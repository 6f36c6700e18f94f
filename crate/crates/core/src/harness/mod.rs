//! Seeded η sweeps over random perturbations, aggregation into per-η
//! statistics, and persistence.

mod aggregate;
mod config;
mod io;
mod records;
mod sweep;

pub use aggregate::{aggregate, write_aggregate_csv, write_histogram_csv, AggregateRow, AggregateTable, CI_LEVEL};
pub use config::{ModelConfig, Preset, SweepConfig, SweepSection};
pub use io::{read_operator_csv, write_operator_csv};
pub use records::{read_records, write_chi_csv, write_records_csv, ReasonCode, SolverKind, SweepRecord, RECORD_COLUMNS};
pub use sweep::{
    analyze_state, chi_rng, evaluate, perturbation_for, run_sweep, sample_seed, workers_from_env, write_atomic,
    AnalysisOptions, PartFile, RunManifest, SolverPlan, StateAnalysis, SweepOutcome, AGGREGATE_FILE, CHI_FILE,
    HISTOGRAM_FILE, MANIFEST_FILE, PARTS_DIR, RECORDS_FILE, REDUCED_RATIO, WORKERS_ENV,
};
