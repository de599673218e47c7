mod args;
mod commands;
mod io;

use std::ffi::OsString;
use std::path::Path;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde::{Deserialize, Serialize};
use serde_json::json;
use xplab::report::{Check, Relation};

use args::*;
use io::{to_value, write_text, CliError, Inputs, Report, Table};

const OK: i32 = 0;
const ERROR: i32 = 1;
const CHECK_FAILED: i32 = 2;

fn main() {
    std::process::exit(run(std::env::args_os()));
}

fn run(argv: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => OK,
                _ => ERROR,
            };
        }
    };
    let inputs = Inputs::default();
    let done = execute(&cli, &inputs).and_then(|(report, table)| {
        emit(&cli, &report, table.as_ref(), &inputs, true)?;
        Ok(report)
    });
    match done {
        Ok(report) => exit_code(&report),
        Err(e) => {
            eprintln!("error: {e}");
            ERROR
        }
    }
}

/// Runs one parsed invocation and builds its report.
fn execute(cli: &Cli, inputs: &Inputs) -> Result<(Report, Option<Table>), CliError> {
    let t0 = Instant::now();
    let tol = cli.tol;
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "--tol must be a nonnegative number, got {tol}"
        )));
    }
    let out = match &cli.command {
        Command::Norm(a) => commands::norm(a, inputs)?,
        Command::Blocks(BlocksCmd::Make(a)) => commands::blocks_make(a, tol, inputs)?,
        Command::Blocks(BlocksCmd::Check(a)) => commands::blocks_check(a, tol, inputs)?,
        Command::Project(a) => commands::project(a, tol, inputs)?,
        Command::Opnorm(a) => commands::opnorm(a, tol, inputs)?,
        Command::Split(a) => commands::split_cmd(a, tol, inputs)?,
        Command::Check(CheckCmd::Thm13(a)) => commands::check_thm13_cmd(a, tol, inputs)?,
        Command::Check(CheckCmd::Prop24(a)) => commands::check_prop24_cmd(a, tol, inputs)?,
        Command::Gen(GenCmd::Thm13(a)) => commands::gen_thm13(a, tol, inputs)?,
        Command::Classify(ClassifyCmd::Kp(a)) => commands::classify_kp(a, inputs)?,
        Command::Diag(DiagCmd::Prop21(a)) => commands::diag_prop21(a, inputs)?,
        Command::Experiment(ExperimentCmd::Defect(a)) => commands::experiment_defect(a, inputs)?,
        Command::Experiment(ExperimentCmd::Criterion(a)) => {
            commands::experiment_criterion(a, inputs)?
        }
        Command::Weights(WeightsCmd::Gen(a)) => commands::weights_gen(a, inputs)?,
        Command::Weights(WeightsCmd::Diag(a)) => commands::weights_diag(a, inputs)?,
        Command::Weights(WeightsCmd::Induced(a)) => commands::weights_induced(a, inputs)?,
        Command::Batch(a) => batch(a, inputs)?,
    };
    let verdict = out.checks.iter().all(|c| !c.failed());
    let table = out
        .table
        .or_else(|| (!out.checks.is_empty()).then(|| Table::of_checks(&out.checks)));
    let report = Report {
        command: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION"),
        config: to_value(cli),
        result: out.result,
        checks: out.checks,
        verdict,
        wall_time_s: cli.timing.then(|| t0.elapsed().as_secs_f64()),
    };
    Ok((report, table))
}

/// A batch with runs that could not complete counts as an error even
/// though its report was written.
fn exit_code(report: &Report) -> i32 {
    if report.command == "batch" && report.result["errors"].as_u64().unwrap_or(0) > 0 {
        ERROR
    } else if report.verdict {
        OK
    } else {
        CHECK_FAILED
    }
}

/// Writes the report to `--out` (or stdout when `stdout` is set) and the
/// CSV to `--csv`; returns the verdict.
fn emit(
    cli: &Cli,
    report: &Report,
    table: Option<&Table>,
    inputs: &Inputs,
    stdout: bool,
) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).expect("reports serialize") + "\n";
    match &cli.out {
        Some(p) => write_text(&inputs.resolve(p), &text)?,
        None if stdout => print!("{text}"),
        None => {}
    }
    if let Some(p) = &cli.csv {
        table
            .cloned()
            .unwrap_or_default()
            .write(&inputs.resolve(p))?;
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchDoc {
    runs: Vec<BatchRun>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BatchRun {
    name: String,
    args: Vec<String>,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    name: String,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<Report>,
}

/// Parses every run first, so one malformed entry aborts before any work;
/// then runs them in file order. Input paths resolve against the batch
/// file's directory.
fn batch(a: &BatchArgs, inputs: &Inputs) -> Result<commands::Outcome, CliError> {
    let doc: BatchDoc = inputs.load(&a.config)?;
    let path = inputs.resolve(&a.config);
    let base = path
        .parent()
        .map(Path::to_path_buf)
        .filter(|p| !p.as_os_str().is_empty());
    let sub_inputs = Inputs { base };
    let mut parsed = Vec::with_capacity(doc.runs.len());
    for r in &doc.runs {
        let argv = std::iter::once("xplab".to_string()).chain(r.args.iter().cloned());
        let cli = Cli::try_parse_from(argv).map_err(|e| {
            CliError::Usage(format!(
                "run {:?}: {}",
                r.name,
                e.render().to_string().trim_end()
            ))
        })?;
        if matches!(cli.command, Command::Batch(_)) {
            return Err(CliError::Usage(format!(
                "run {:?}: batches do not nest",
                r.name
            )));
        }
        parsed.push((r.name.clone(), cli));
    }
    let mut runs = Vec::with_capacity(parsed.len());
    let (mut passed, mut failed, mut errors) = (0usize, 0usize, 0usize);
    for (name, cli) in &parsed {
        let res = execute(cli, &sub_inputs).and_then(|(rep, table)| {
            emit(cli, &rep, table.as_ref(), &sub_inputs, false)?;
            Ok(rep)
        });
        let summary = match res {
            Ok(rep) => {
                let code = exit_code(&rep);
                if rep.verdict {
                    passed += 1;
                } else {
                    failed += 1;
                }
                RunSummary {
                    name: name.clone(),
                    exit_code: code,
                    error: None,
                    report: Some(rep),
                }
            }
            Err(e) => {
                errors += 1;
                RunSummary {
                    name: name.clone(),
                    exit_code: ERROR,
                    error: Some(e.to_string()),
                    report: None,
                }
            }
        };
        runs.push(summary);
    }
    if errors > 0 {
        let first = runs
            .iter()
            .find_map(|r| r.error.clone())
            .unwrap_or_default();
        eprintln!("error: {errors} run(s) could not complete; first: {first}");
    }
    let checks = vec![
        Check::new("failed runs", failed as f64, Relation::Le, 0.0, 0.0),
        Check::new("errored runs", errors as f64, Relation::Le, 0.0, 0.0),
    ];
    let mut out = commands::Outcome::new(
        json!({ "passed": passed, "failed": failed, "errors": errors, "runs": runs }),
        checks,
    );
    out.table = Some(Table {
        headers: ["name", "exit_code", "verdict"].map(String::from).to_vec(),
        rows: runs
            .iter()
            .map(|r| {
                vec![
                    r.name.clone(),
                    r.exit_code.to_string(),
                    r.report.as_ref().is_some_and(|x| x.verdict).to_string(),
                ]
            })
            .collect(),
    });
    Ok(out)
}
