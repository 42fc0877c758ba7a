//! `regvort` command-line front end.
//!
//! ```text
//! regvort <COMMAND> [--config FILE] [--output DIR] [--threads N] [--key.path=value ...]
//! ```
//!
//! `FILE` is TOML, or a `manifest.json` from an earlier run. Any config key
//! can be overridden with a dotted flag such as `--time.dt=0.001`.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use config::{apply_override, from_table, load_table, ConfigError, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    KernelVerify,
    Simulate,
    L1Distance,
    Converge,
    Picard,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::KernelVerify => "kernel-verify",
            Command::Simulate => "simulate",
            Command::L1Distance => "l1-distance",
            Command::Converge => "converge",
            Command::Picard => "picard",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "regvort", version, about = "Regularized 2D Euler vortex dynamics")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML config or a previous run's manifest.json.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output`).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    status: &'static str,
    command: &'a str,
    kind: &'static str,
    field: Option<&'a str>,
    message: String,
}

/// Split `--a.b=value` / `--a.b value` overrides from the ordinary flags.
fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), ConfigError> {
    let mut plain = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            plain.push(arg);
            continue;
        };
        let (key, inline) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        if !key.contains('.') {
            plain.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| ConfigError {
                field: key.clone(),
                message: "override is missing a value".into(),
            })?,
        };
        overrides.push((key, value));
    }
    Ok((plain, overrides))
}

fn resolve(cli: &Cli, overrides: &[(String, String)]) -> anyhow::Result<RunConfig> {
    let command = cli.command.name();
    let mut table = match &cli.config {
        Some(path) => load_table(path)?,
        None => toml::Table::new(),
    };
    for (k, v) in overrides {
        apply_override(&mut table, k, v)?;
    }
    if let Some(out) = &cli.output {
        table.insert("output".into(), toml::Value::String(out.display().to_string()));
    }
    let mut config = from_table(table)?;
    match &config.experiment.kind {
        Some(k) if k != command => {
            return Err(ConfigError {
                field: "experiment.kind".into(),
                message: format!("config was written for `{k}`, not `{command}`"),
            }
            .into())
        }
        _ => config.experiment.kind = Some(command.to_string()),
    }
    config.validate(command)?;
    Ok(config)
}

fn report(command: &str, kind: &'static str, err: &anyhow::Error, output: Option<&std::path::Path>) {
    let field = err.downcast_ref::<ConfigError>().map(|e| e.field.as_str()).filter(|f| !f.is_empty());
    let record = ErrorRecord {
        status: "error",
        command,
        kind,
        field,
        message: format!("{err:#}"),
    };
    let line = serde_json::to_string(&record).expect("error record serializes");
    eprintln!("{line}");
    if let Some(dir) = output {
        if dir.is_dir() {
            let _ = std::fs::write(dir.join("error.json"), format!("{line}\n"));
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let (plain, overrides) = match split_overrides(args) {
        Ok(v) => v,
        Err(e) => {
            report("", "config", &e.into(), None);
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(plain);
    let command = cli.command.name();

    let config = match resolve(&cli, &overrides) {
        Ok(c) => c,
        Err(e) => {
            report(command, "config", &e, None);
            return ExitCode::from(2);
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            report(command, "runtime", &e.into(), None);
            return ExitCode::from(1);
        }
    };

    match pool.install(|| run::run(command, &config)) {
        Ok(files) => {
            for f in files {
                println!("{}", config.output.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            report(command, "runtime", &e, Some(&config.output));
            ExitCode::from(1)
        }
    }
}
