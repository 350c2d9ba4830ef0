//! Monte Carlo studies: fixed designs, t and contaminated responses,
//! replication scheduling and the summary metrics.

mod design;
mod metrics;
pub mod presets;
mod responses;
mod study;

pub use design::{design_hash, generate_design, DesignMode, HYBRID_EXTRA_ROWS, HYBRID_P};
pub use metrics::{nu_metrics, rmse_beta, MarkerPolicy, NuMetrics};
pub use presets::{preset, preset_names};
pub use responses::{generate_responses, BaseError, ContaminationKind, ContaminationSpec, ErrorSpec};
pub use study::{
    run_replicates, run_study, run_study_with, Execution, MethodMetrics, MethodReplicate, MetricsReport, OmegaInit,
    Outcome, RunMetadata, SimulationSpec, StudyMethod,
};
