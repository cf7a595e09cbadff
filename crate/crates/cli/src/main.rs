use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use tangent_qk::scenario::{self, CheckId, Execution, RunOptions};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Runs verification scenarios on tangent bundles and reports per-check residuals.
#[derive(Debug, Parser)]
#[command(name = "verify", version)]
struct Args {
    /// Built-in scenario name or path to a scenario file.
    #[arg(required_unless_present_any = ["list_builtins", "list_checks"])]
    scenario: Option<String>,

    /// Comma-separated check identifiers; defaults to the scenario's list.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,

    /// Number of sample points (default: the scenario's, usually 50).
    #[arg(long)]
    samples: Option<usize>,

    /// RNG seed (default: the scenario's, usually 42).
    #[arg(long)]
    seed: Option<u64>,

    /// Scales the thresholds of checks expected to vanish.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Include wall time in the report.
    #[arg(long)]
    timing: bool,

    /// Evaluate sample points on one thread.
    #[arg(long)]
    sequential: bool,

    /// Print the scenario in canonical file form and exit.
    #[arg(long)]
    print_spec: bool,

    #[arg(long)]
    list_builtins: bool,

    #[arg(long)]
    list_checks: bool,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_builtins {
        for name in scenario::BUILTIN_NAMES {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    if args.list_checks {
        for id in CheckId::ALL {
            println!("{:<22} {}", id.name(), id.anchor());
        }
        return ExitCode::SUCCESS;
    }
    if !(args.tol_scale > 0.0 && args.tol_scale.is_finite()) {
        return usage_error("--tol-scale must be a positive number");
    }
    let checks = match &args.checks {
        Some(list) => {
            let mut ids = Vec::new();
            for name in list.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
                match CheckId::from_name(name) {
                    Some(id) => ids.push(id),
                    None => return usage_error(&format!("unknown check `{name}` (see --list-checks)")),
                }
            }
            Some(ids)
        }
        None => None,
    };
    let name = args.scenario.as_deref().expect("clap enforces a scenario");
    let spec = match scenario::resolve(name) {
        Ok(s) => s,
        Err(e) => return usage_error(&format!("{name}: {e}")),
    };
    if args.print_spec {
        print!("{}", spec.to_text());
        return ExitCode::SUCCESS;
    }
    let opts = RunOptions {
        checks,
        samples: args.samples,
        seed: args.seed,
        tol_scale: args.tol_scale,
        timing: args.timing,
        execution: if args.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let report = match scenario::run(&spec, &opts) {
        Ok(r) => r,
        Err(e) => return usage_error(&format!("{name}: {e}")),
    };
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
