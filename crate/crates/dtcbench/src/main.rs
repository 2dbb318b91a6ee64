//! Command-line front end.
//!
//! ```text
//! dtcbench run <config.ini> [--out DIR]
//! dtcbench compare <config.ini> [--out DIR] [--threshold R]
//! dtcbench sweep <config.ini> --key SECTION.KEY --values V1,V2,... [--out DIR]
//! ```
//!
//! The output directory defaults to `DTCBENCH_OUT` from the environment,
//! then to the current directory.

use dtcbench::commands::{cmd_compare, cmd_run, cmd_sweep, CmdError};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "usage:
  dtcbench run <config.ini> [--out DIR]
  dtcbench compare <config.ini> [--out DIR] [--threshold R]
  dtcbench sweep <config.ini> --key SECTION.KEY --values V1,V2,... [--out DIR]

The output directory defaults to $DTCBENCH_OUT, then to `.`.";

struct Args {
    config: PathBuf,
    out_dir: PathBuf,
    threshold: f64,
    key: Option<String>,
    values: Vec<String>,
}

fn parse_args(mut argv: std::env::Args) -> Result<(String, Args), String> {
    let _ = argv.next();
    let command = argv.next().ok_or_else(|| USAGE.to_string())?;
    let mut config = None;
    let mut out_dir = None;
    let mut threshold = 0.0;
    let mut key = None;
    let mut values = Vec::new();
    let mut rest = argv.peekable();
    while let Some(arg) = rest.next() {
        match arg.as_str() {
            "--out" => {
                out_dir = Some(PathBuf::from(
                    rest.next().ok_or("--out requires a directory")?,
                ));
            }
            "--threshold" => {
                let raw = rest.next().ok_or("--threshold requires a number")?;
                threshold = raw
                    .parse()
                    .map_err(|_| format!("--threshold: `{raw}` is not a number"))?;
            }
            "--key" => key = Some(rest.next().ok_or("--key requires a key name")?),
            "--values" => {
                let raw = rest.next().ok_or("--values requires a comma-separated list")?;
                values = raw.split(',').map(|s| s.trim().to_string()).collect();
            }
            other if config.is_none() && !other.starts_with("--") => {
                config = Some(PathBuf::from(other));
            }
            other => return Err(format!("unexpected argument `{other}`\n\n{USAGE}")),
        }
    }
    let config = config.ok_or_else(|| format!("missing <config.ini>\n\n{USAGE}"))?;
    let out_dir = out_dir
        .or_else(|| std::env::var_os("DTCBENCH_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((command, Args { config, out_dir, threshold, key, values }))
}

fn main() -> ExitCode {
    let (command, args) = match parse_args(std::env::args()) {
        Ok(parsed) => parsed,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    let result: Result<bool, CmdError> = match command.as_str() {
        "run" => cmd_run(&args.config, &args.out_dir).map(|_| true),
        "compare" => cmd_compare(&args.config, &args.out_dir, args.threshold),
        "sweep" => {
            let key = match args.key {
                Some(ref k) => k,
                None => {
                    eprintln!("sweep requires --key\n\n{USAGE}");
                    return ExitCode::from(2);
                }
            };
            if args.values.is_empty() {
                eprintln!("sweep requires --values\n\n{USAGE}");
                return ExitCode::from(2);
            }
            cmd_sweep(&args.config, &args.out_dir, key, &args.values).map(|_| true)
        }
        other => {
            eprintln!("unknown command `{other}`\n\n{USAGE}");
            return ExitCode::from(2);
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CmdError::Config(e)) => {
            eprintln!("{}: {e}", args.config.display());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
