//! Experiment configuration, orchestration and result files.

mod config;
mod plots;
mod run;

pub use config::{
    load_config, BaselineSpec, BoundsSpec, ExperimentConfig, Family, GaSpec, InitialSpec, ModeKind, PhysicsSpec,
    SweepSpec, TargetSpec, TimingSpec,
};
pub use plots::{delta_j_percent, emit_plot_data, load_results, run_tag};
pub use run::{
    ancilla_series, run_baseline_experiment, run_comparison, run_experiment, run_sweep, target_state, verify_refit,
    AncillaSeries, BaselineComparison, RunResult, ScenarioSummary, Setup, SweepResult, TracePoint, REFIT_TOL,
    SUMMARY_FILE, SWEEP_FILE, TRACE_FILE,
};
