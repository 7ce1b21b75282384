//! Command-line front end: data ingestion, fitting, oracle comparison,
//! benchmarking and artifact emission.

pub mod args;
pub mod commands;
pub mod error;
pub mod ingest;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
pub use error::CliError;

/// Outcome of a successful invocation: lines for standard output.
pub type Report = Vec<String>;

/// The invocation as recorded at the top of every artifact.
pub fn invocation_line(args: &[String]) -> String {
    let quoted: Vec<String> = args
        .iter()
        .map(|a| {
            if !a.is_empty() && a.chars().all(|c| c.is_ascii_alphanumeric() || "-_.,/:=;+".contains(c)) {
                a.clone()
            } else {
                format!("'{}'", a.replace('\'', "'\\''"))
            }
        })
        .collect();
    format!("dpm-seq {}", quoted.join(" "))
}

/// Runs the command line `args` (without the program name).
pub fn run(args: &[String]) -> Result<Report, CliError> {
    let argv = std::iter::once("dpm-seq".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Ok(vec![e.to_string().trim_end().to_string()]);
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            return Err(CliError::Usage(first));
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".to_string()));
        }
        // A pool may already exist when called repeatedly in one process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let inv = invocation_line(args);
    let wrote = |p: std::path::PathBuf| format!("wrote {}", p.display());
    Ok(match &cli.command {
        Command::Gen(a) => vec![wrote(commands::gen(a, &inv)?)],
        Command::Fit(a) => vec![wrote(commands::fit(a, &inv)?)],
        Command::Density(a) => vec![wrote(commands::density(a, &inv)?)],
        Command::Bench(a) => vec![wrote(commands::bench(a, &inv)?)],
        Command::Compare(a) => vec![wrote(commands::compare(a, &inv)?)],
        Command::Genotype(a) => {
            let (path, acc) = commands::genotype(a, &inv)?;
            let mut out = vec![wrote(path)];
            if let Some(acc) = acc {
                out.push(format!("concordance {}", commands::num(acc)));
            }
            out
        }
    })
}
