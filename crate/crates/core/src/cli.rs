// SPDX-License-Identifier: Apache-2.0

//! `slaac-sim run <scenario> [--trace PATH] [--metrics PATH] [--check]
//! [--dump-normalized] [--seed N]`
//!
//! Exit status: 0 clean run, 1 parse/validation/scenario error, 2 internal
//! invariant violation, 3 an `expect` line failed under `--check`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::scenario::{parse_scenario, print_scenario, Expectation, Scenario};
use crate::sim::{Engine, SimError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "slaac-sim",
    version,
    about = "Simulate SLAAC, RA spoofing attacks and first-hop defenses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file.
    Run(RunArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
    /// Write the event trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write measurement snapshots here.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// Evaluate the scenario's `expect` lines.
    #[arg(long)]
    pub check: bool,
    /// Print the scenario in canonical form and exit.
    #[arg(long)]
    pub dump_normalized: bool,
    /// Override the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectationResult {
    pub expectation: Expectation,
    pub actual: Option<String>,
    pub passed: bool,
}

/// Looks up a metric against the last measurement. `trace.<kind>` counts
/// trace records of that kind over the whole run.
pub fn metric_value(engine: &Engine, metric: &str) -> Option<String> {
    if let Some(kind) = metric.strip_prefix("trace.") {
        return Some(
            engine
                .trace()
                .iter()
                .filter(|r| r.kind == kind)
                .count()
                .to_string(),
        );
    }
    engine.measurements().last()?.get(metric)
}

pub fn evaluate_expectations(scenario: &Scenario, engine: &Engine) -> Vec<ExpectationResult> {
    scenario
        .expectations
        .iter()
        .map(|e| {
            let actual = metric_value(engine, &e.metric);
            let passed = actual.as_deref().is_some_and(|a| e.holds(a));
            ExpectationResult {
                expectation: e.clone(),
                actual,
                passed,
            }
        })
        .collect()
}

/// Parses and runs a scenario to completion.
pub fn run_scenario(scenario: &Scenario, seed: Option<u64>) -> Result<Engine, SimError> {
    let mut engine = Engine::from_scenario(scenario, seed)?;
    engine.run()?;
    Ok(engine)
}

fn metrics_text(engine: &Engine) -> String {
    engine
        .measurements()
        .iter()
        .map(ToString::to_string)
        .collect()
}

/// Entry point shared by the binary and tests. `args` excludes the program
/// name.
pub fn run_command<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv = std::iter::once(std::ffi::OsString::from("slaac-sim"))
        .chain(args.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let Command::Run(args) = cli.command;
    run(&args, stdout, stderr)
}

fn run(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let path = args.scenario.display();
    let text = match std::fs::read_to_string(&args.scenario) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot read {path}: {e}");
            return EXIT_INPUT;
        }
    };
    let scenario = match parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(stderr, "error: {path}: {e}");
            return EXIT_INPUT;
        }
    };
    if args.dump_normalized {
        let _ = write!(stdout, "{}", print_scenario(&scenario));
        return EXIT_OK;
    }
    let engine = match run_scenario(&scenario, args.seed) {
        Ok(e) => e,
        Err(e @ SimError::Invariant { .. }) => {
            let _ = writeln!(stderr, "internal error: {e}");
            return EXIT_INVARIANT;
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {path}: {e}");
            return EXIT_INPUT;
        }
    };
    for (target, content) in [
        (&args.trace, engine.trace_text()),
        (&args.metrics, metrics_text(&engine)),
    ] {
        if let Some(p) = target {
            if let Err(e) = std::fs::write(p, content) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", p.display());
                return EXIT_INPUT;
            }
        }
    }
    if let Some(last) = engine.measurements().last() {
        for (name, value) in last.attack_flags() {
            let _ = writeln!(stdout, "{name}={value}");
        }
    }
    if args.check {
        let mut failed = 0;
        for r in evaluate_expectations(&scenario, &engine) {
            let actual = r.actual.as_deref().unwrap_or("<missing>");
            if r.passed {
                let _ = writeln!(stderr, "expect {} ok", r.expectation);
            } else {
                failed += 1;
                let _ = writeln!(stderr, "expect {} FAILED (actual {actual})", r.expectation);
            }
        }
        if failed > 0 {
            return EXIT_CHECK_FAILED;
        }
    }
    EXIT_OK
}
