//! Scenario files, built-in scenarios, the check registry and the runner.

mod builtins;
mod checks;
mod runner;
mod spec;

pub use builtins::{builtin, builtin_text, NAMES as BUILTIN_NAMES};
pub use checks::{evaluate, needs_surface, CheckId, Outcome, Sample, TAU_TORSION_FLOOR};
pub use runner::{
    evaluate_samples, run, sample_points, validate_manifold, CheckReport, Execution, Expect, Report, RunOptions,
    Verdict, FIBER_NORM, VALIDATION_POINTS,
};
pub use spec::{ScenarioSpec, SpecError, Tolerances, DEFAULT_SAMPLES, DEFAULT_SEED};

/// Resolves a built-in name or loads a scenario file.
pub fn resolve(name_or_path: &str) -> Result<ScenarioSpec, SpecError> {
    match builtin(name_or_path) {
        Some(s) => Ok(s),
        None => ScenarioSpec::load(name_or_path),
    }
}
