//! Benchmark targets, the spectral oracle for `|f̂|`, error metrics and the
//! sweep drivers behind the command-line tool.

mod driver;
mod metrics;
mod si;
mod spectrum;
mod targets;

pub use driver::{
    derive_seed, format_k_grid, parse_k_grid, prepare_replica, run_task, sort_rows, sweep_k,
    sweep_sigma_omega, task_seed, CaseData, CaseId, CheckpointRow, ExperimentConfig, MethodKind,
    MethodParams, MethodSpec, PreparedData, ResultRow, SigmaSweepConfig, SweepOutput,
};
pub use metrics::{
    convergence_slope, error_bars, generalization_error, misclassification_rate, ErrorBar,
};
pub use si::sine_integral;
pub use spectrum::{
    fft_fhat_magnitude, histogram_probabilities, radial_bin_edges, spectrum_bin_probabilities,
    tv_distance, Spectrum,
};
pub use targets::{generate_dataset, TargetFunction, TargetKind};
