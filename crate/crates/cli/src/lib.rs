//! Command-line front end: graph files, subcommands and JSON reports.

pub mod args;
pub mod format;
pub mod pipeline;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

pub use args::Cli;
pub use format::{parse_graph, parse_graph_str, serialize_graph, FormatError};
pub use pipeline::{Outcome, PipelineError};

/// Captured result of one command-line invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

/// Runs `kpart` with the given argument vector (including the program name).
/// The report goes to `--out` when given, otherwise to `stdout`.
pub fn run_from<I, T>(argv: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let exit_code = if e.use_stderr() { pipeline::EXIT_PARSE } else { pipeline::EXIT_OK };
            let text = e.render().to_string();
            let (stdout, stderr) = if e.use_stderr() { (String::new(), text) } else { (text, String::new()) };
            return Invocation { stdout, stderr, exit_code };
        }
    };
    let out = match &cli.command {
        args::Command::GapDemo(a) => a.output.out.clone(),
        args::Command::AuditSeparators(a) => a.graph.output.out.clone(),
        args::Command::Solve(a)
        | args::Command::Round(a)
        | args::Command::Partition(a)
        | args::Command::Balanced(a)
        | args::Command::Oracle(a)
        | args::Command::Spectrum(a) => a.output.out.clone(),
    };
    match pipeline::run_command(&cli.command) {
        Ok(outcome) => {
            let text = report::render(&outcome.report);
            match out {
                Some(path) => match std::fs::write(&path, &text) {
                    Ok(()) => Invocation { stdout: String::new(), stderr: String::new(), exit_code: outcome.exit_code },
                    Err(e) => Invocation {
                        stdout: String::new(),
                        stderr: format!("kpart: {}: {e}\n", path.display()),
                        exit_code: pipeline::EXIT_INTERNAL,
                    },
                },
                None => Invocation { stdout: text, stderr: String::new(), exit_code: outcome.exit_code },
            }
        }
        Err(e) => Invocation {
            stdout: String::new(),
            stderr: format!("kpart {}: {e}\n", pipeline::subcommand_name(&cli.command)),
            exit_code: e.exit_code(),
        },
    }
}
