use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use metspace_cli::commands::{run, Cli, Failure};
use metspace_cli::report::Format;

const EXIT_VIOLATION: u8 = 2;
const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 64;

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("METSPACE_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| format!("METSPACE_THREADS={v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let report = match run(&cli.command, &cli.globals) {
        Ok(r) => r,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_ERROR);
        }
    };
    let g = &cli.globals;
    let written = match (&g.out, g.format) {
        (Some(dir), format) => report.write_to(dir, format.unwrap_or(Format::Json)).and_then(|_| {
            std::io::stdout().write_all(report.to_text().as_bytes())
        }),
        (None, Some(format)) => std::io::stdout().write_all(report.render(format).as_bytes()),
        (None, None) => std::io::stdout().write_all(report.to_text().as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_ERROR);
    }
    if report.violations.is_empty() {
        return ExitCode::SUCCESS;
    }
    for v in &report.violations {
        eprintln!("violation: {} (value {:e}, bound {:e})", v.invariant, v.value, v.bound);
    }
    ExitCode::from(EXIT_VIOLATION)
}
