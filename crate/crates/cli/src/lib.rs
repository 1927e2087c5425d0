//! `esqpt-lab`: batch runs over the ESQPT toolkit. A run reads one JSON
//! config, writes CSV tables (and optionally SVG figures) to an output
//! directory, and always finishes with a `manifest.json` listing every
//! file, the validated config and per-task status.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

use std::fs;
use std::path::PathBuf;

use chrono::{SecondsFormat, Utc};
use serde_json::Value;

pub use config::{RunConfig, Subcommand};
pub use error::{CliError, CliResult};

use output::{Manifest, Output};

/// One command-line invocation.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub subcommand: Subcommand,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub plots: bool,
}

/// Outcome of a run: the exit status and the lines to print.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub stdout: Vec<String>,
    /// Single-line JSON error record, when the run failed.
    pub error: Option<Value>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Runs one invocation to completion. Failures never escape: they become
/// an error record, an `error.json` file and a nonzero exit code, and the
/// manifest is written whenever the output directory can be created.
pub fn run(inv: &Invocation) -> RunOutcome {
    let started = now();
    let sub = inv.subcommand;
    let mut echo = Value::Null;
    let mut output_dir = inv.out.clone();

    let resolved = fs::read_to_string(&inv.config)
        .map_err(|e| CliError::io(&inv.config, e))
        .and_then(|text| {
            let (raw, value) = config::parse_raw(&text)?;
            echo = value;
            if output_dir.is_none() {
                output_dir = raw.output.as_ref().map(PathBuf::from);
            }
            config::resolve(&raw, sub, inv.out.clone(), inv.plots)
        });
    let dir = match &resolved {
        Ok(cfg) => cfg.output.clone(),
        Err(_) => output_dir.unwrap_or_else(|| PathBuf::from("out")),
    };

    let mut out = match Output::create(&dir) {
        Ok(o) => o,
        Err(e) => {
            let record = e.record(sub.name());
            return RunOutcome {
                exit_code: e.exit_code(),
                stdout: Vec::new(),
                error: Some(record),
            };
        }
    };

    let resolved_value = resolved
        .as_ref()
        .ok()
        .and_then(|c| serde_json::to_value(c).ok())
        .unwrap_or(Value::Null);
    let result = match resolved {
        Ok(cfg) => {
            log::info!("{sub}: writing to {}", dir.display());
            commands::execute(&cfg, &mut out).and_then(|()| match out.failed_tasks() {
                0 => Ok(()),
                failed => Err(CliError::PartialFailure {
                    failed,
                    total: out.tasks.len(),
                }),
            })
        }
        Err(e) => Err(e),
    };

    let (status, error) = match &result {
        Ok(()) => ("ok", Value::Null),
        Err(e) => {
            let record = e.record(sub.name());
            if let Err(write_err) = out.json("error.json", &record, "machine-readable error record") {
                log::error!("could not write error.json: {write_err}");
            }
            (if out.tasks.iter().any(|t| t.status == "ok") { "partial" } else { "failed" }, record)
        }
    };

    let manifest = Manifest {
        artifact: env!("CARGO_PKG_NAME"),
        artifact_version: env!("CARGO_PKG_VERSION"),
        subcommand: sub.name().into(),
        status: status.into(),
        started,
        finished: now(),
        workers: rayon::current_num_threads(),
        config: echo,
        resolved_config: resolved_value,
        tasks: out.tasks.clone(),
        files: out.files.clone(),
        notes: out.notes.clone(),
        summary: Value::Object(out.summary.clone()),
        error: error.clone(),
    };
    let mut stdout = Vec::new();
    let manifest_result = manifest.write(&dir);
    if let Err(e) = &manifest_result {
        log::error!("could not write the manifest: {e}");
    }

    match result {
        Ok(()) => {
            if let Err(e) = manifest_result {
                return RunOutcome {
                    exit_code: e.exit_code(),
                    stdout,
                    error: Some(e.record(sub.name())),
                };
            }
            for note in &out.notes {
                stdout.push(note.clone());
            }
            stdout.push(format!(
                "{sub}: {} files written to {} (see {})",
                out.files.len(),
                dir.display(),
                output::MANIFEST_NAME
            ));
            RunOutcome {
                exit_code: 0,
                stdout,
                error: None,
            }
        }
        Err(e) => RunOutcome {
            exit_code: e.exit_code(),
            stdout,
            error: Some(error),
        },
    }
}
