//! The steepest-descent optimization loop, its configuration and outputs.

mod config;
mod output;
mod run;

pub use config::{parse_config, parse_config_str, InnerSolverKind, OptimConfig};
pub use output::{runlog_csv, write_outputs, write_runlog_csv, write_step_vtk, RUNLOG_HEADER};
pub use run::{
    build_hierarchy, run_optimize, run_optimize_with, shape_convergence_report, ExitStatus, GradientHook,
    RejectedTrial, RunFailure, RunLog, StepRecord, StepTiming,
};
