//! Experiment harness: configuration, instance generation, the sensitivity and
//! online-learning protocols, CSV/SVG emission, and verification suites.

pub mod config;
pub mod emit;
pub mod generate;
pub mod run;
pub mod verify;

pub use config::{DistributionKind, EnvKind, ExperimentConfig, ExperimentKind, DEFAULT_OMEGAS};
pub use emit::{from_csv, to_csv, to_svg, write_csv, write_svg, CSV_HEADER};
pub use generate::{generate_dual_instance, generate_instance, sample_length};
pub use run::{
    baseline_objective, derive_seed, run_experiment, run_online_learning, run_sensitivity,
    ExperimentRecord, OnlineOutcome,
};
pub use verify::{verify_suite, SuiteReport};
