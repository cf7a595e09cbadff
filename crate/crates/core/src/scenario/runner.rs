//! Sampling, execution and reporting.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::checks::{evaluate, CheckId, Outcome, Sample};
use super::spec::{ScenarioSpec, SpecError};
use crate::base_manifold::ChartManifold;
use crate::tangent_bundle::{StiefelPair, TMPoint};

/// Number of base points at which the structural invariants are validated
/// before a run.
pub const VALIDATION_POINTS: usize = 16;
/// Range of the fiber norm `|v|_g`.
pub const FIBER_NORM: (f64, f64) = (0.1, 2.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub checks: Option<Vec<CheckId>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Multiplies the thresholds of checks expected to vanish.
    pub tol_scale: f64,
    pub timing: bool,
    pub execution: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { checks: None, samples: None, seed: None, tol_scale: 1.0, timing: false, execution: Execution::Parallel }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Zero,
    Nonzero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub anchor: &'static str,
    /// Points at which the check applied and evaluated.
    pub points: usize,
    pub max: Option<f64>,
    pub min: Option<f64>,
    pub threshold: f64,
    pub expect: Expect,
    pub verdict: Verdict,
    /// Distinct evaluation errors, if any.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: String,
    pub connection: &'static str,
    pub seed: u64,
    pub samples: usize,
    pub version: &'static str,
    pub checks: Vec<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn check(&self, id: CheckId) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == id.name())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "scenario {} (connection {}, seed {}, {} samples)\n",
            self.scenario, self.connection, self.seed, self.samples
        );
        let _ = writeln!(s, "{:<22} {:>7} {:>7} {:>11} {:>11} {:>9}  verdict", "check", "expect", "points", "max", "min", "threshold");
        let num = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3e}"));
        for c in &self.checks {
            let expect = match c.expect {
                Expect::Zero => "zero",
                Expect::Nonzero => "nonzero",
            };
            let verdict = match c.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
            };
            let _ = writeln!(
                s,
                "{:<22} {:>7} {:>7} {:>11} {:>11} {:>9.1e}  {verdict}",
                c.name,
                expect,
                c.points,
                num(c.max),
                num(c.min),
                c.threshold
            );
            for e in &c.errors {
                let _ = writeln!(s, "    error: {e}");
            }
        }
        let failed = self.checks.iter().filter(|c| c.verdict == Verdict::Fail).count();
        let _ = writeln!(s, "{} checks, {} failed", self.checks.len(), failed);
        if let Some(t) = self.wall_time_s {
            let _ = writeln!(s, "wall time {t:.3} s");
        }
        s
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn sample_x(rng: &mut ChaCha8Rng, bounds: &[(f64, f64)]) -> Vec<f64> {
    bounds.iter().map(|(lo, hi)| rng.random_range(*lo..*hi)).collect()
}

/// `count` samples: `x` uniform in the box, `v` with uniform `g`-norm in
/// [`FIBER_NORM`] and a Gaussian direction, and a random orthonormal pair in `R⁴`.
pub fn sample_points(mfd: &ChartManifold, count: usize, seed: u64) -> Result<Vec<Sample>, SpecError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = mfd.dim();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = sample_x(&mut rng, mfd.bounds());
        let dir = gaussian(&mut rng, m);
        let norm = rng.random_range(FIBER_NORM.0..FIBER_NORM.1);
        let a: [f64; 4] = gaussian(&mut rng, 4).try_into().expect("four entries");
        let b: [f64; 4] = gaussian(&mut rng, 4).try_into().expect("four entries");
        let g = mfd.metric_at(&x)?;
        let gn: f64 = (0..m).map(|i| (0..m).map(|j| g[(i, j)] * dir[i] * dir[j]).sum::<f64>()).sum::<f64>().sqrt();
        let Some(pair) = StiefelPair::orthonormalize(a, b) else { continue };
        if gn < 1e-12 {
            continue;
        }
        let v = dir.iter().map(|d| d * norm / gn).collect();
        out.push(Sample { point: TMPoint { x, v }, pair });
    }
    Ok(out)
}

/// Validates the manifold data at [`VALIDATION_POINTS`] base points drawn from
/// a stream independent of the check samples.
pub fn validate_manifold(mfd: &ChartManifold, seed: u64) -> Result<(), SpecError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    for _ in 0..VALIDATION_POINTS {
        mfd.validate_at(&sample_x(&mut rng, mfd.bounds()))?;
    }
    Ok(())
}

/// Evaluates `checks` at every sample. Result order follows `samples`.
pub fn evaluate_samples(
    mfd: &ChartManifold,
    spec: &ScenarioSpec,
    samples: &[Sample],
    checks: &[(CheckId, bool)],
    execution: Execution,
) -> Vec<Vec<Outcome>> {
    let run = |s: &Sample| evaluate(mfd, spec.connection, s, checks);
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            samples.par_iter().map(run).collect()
        }
        _ => samples.iter().map(run).collect(),
    }
}

fn summarize(id: CheckId, nonzero: bool, threshold: f64, outcomes: impl Iterator<Item = Outcome>) -> CheckReport {
    let mut max: Option<f64> = None;
    let mut min: Option<f64> = None;
    let mut points = 0;
    let mut errors: Vec<String> = Vec::new();
    for o in outcomes {
        match o {
            Ok(Some(v)) => {
                points += 1;
                // NaN must fail either side
                let v = if v.is_nan() { f64::INFINITY * if nonzero { -1.0 } else { 1.0 } } else { v };
                max = Some(max.map_or(v, |m| m.max(v)));
                min = Some(min.map_or(v, |m| m.min(v)));
            }
            Ok(None) => {}
            Err(e) => {
                if !errors.contains(&e) && errors.len() < 3 {
                    errors.push(e);
                }
            }
        }
    }
    let ok = errors.is_empty()
        && points > 0
        && if nonzero { min.is_some_and(|v| v > threshold) } else { max.is_some_and(|v| v <= threshold) };
    CheckReport {
        name: id.name(),
        anchor: id.anchor(),
        points,
        max,
        min,
        threshold,
        expect: if nonzero { Expect::Nonzero } else { Expect::Zero },
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        errors,
    }
}

/// Runs a scenario. Errors are limited to invalid scenario data; failing
/// checks are reported as verdicts.
pub fn run(spec: &ScenarioSpec, opts: &RunOptions) -> Result<Report, SpecError> {
    let start = Instant::now();
    spec.validate()?;
    let mfd = spec.manifold()?;
    let seed = opts.seed.unwrap_or(spec.seed);
    let count = opts.samples.unwrap_or(spec.samples);
    if count == 0 {
        return Err(SpecError::Invalid("samples must be positive".into()));
    }
    validate_manifold(&mfd, seed)?;
    let ids: Vec<CheckId> = match &opts.checks {
        Some(filter) => filter.clone(),
        None => spec.checks.clone(),
    };
    let plan: Vec<(CheckId, bool)> = ids.iter().map(|id| (*id, spec.expect_nonzero.contains(id))).collect();
    let samples = sample_points(&mfd, count, seed)?;
    let outcomes = evaluate_samples(&mfd, spec, &samples, &plan, opts.execution);
    let checks = plan
        .iter()
        .enumerate()
        .map(|(n, (id, nonzero))| {
            let threshold = if *nonzero {
                spec.tolerances.nonzero.get(id).copied().unwrap_or(id.nonzero_threshold())
            } else {
                spec.tolerances.zero.get(id).copied().unwrap_or(id.zero_threshold()) * opts.tol_scale
            };
            summarize(*id, *nonzero, threshold, outcomes.iter().map(|row| row[n].clone()))
        })
        .collect();
    Ok(Report {
        scenario: spec.name.clone(),
        connection: spec.connection.name(),
        seed,
        samples: count,
        version: env!("CARGO_PKG_VERSION"),
        checks,
        wall_time_s: opts.timing.then(|| start.elapsed().as_secs_f64()),
    })
}
