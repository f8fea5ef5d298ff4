//! The `rowsub` command-line driver.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::coalesce::print_type;
use crate::infer::Engine;
use crate::syntax::parse;
use crate::trace::format_trace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE_ERROR: i32 = 1;
pub const EXIT_PARSE_ERROR: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "rowsub",
    version,
    about = "Type inference for extensible records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Infer and print the type of one term.
    Infer {
        /// Print the derivation trace before the result.
        #[arg(long)]
        trace: bool,
        /// Term to type, given inline.
        #[arg(
            short = 'e',
            long = "expr",
            value_name = "EXPR",
            conflicts_with = "file"
        )]
        expr: Option<String>,
        /// File containing the term.
        #[arg(value_name = "FILE", required_unless_present = "expr")]
        file: Option<PathBuf>,
    },
    /// Read one term per line and print its type. `:q` quits.
    Repl,
}

/// Runs the driver and returns the process exit code. `interactive` enables
/// the REPL prompt.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    interactive: bool,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let code = match Cli::try_parse_from(args) {
        Ok(cli) => match cli.command {
            Command::Infer { trace, expr, file } => {
                let source = match (expr, file) {
                    (Some(e), _) => e,
                    (None, Some(path)) => match std::fs::read_to_string(&path) {
                        Ok(s) => s,
                        Err(e) => {
                            let _ = writeln!(stderr, "error: cannot read {}: {e}", path.display());
                            return EXIT_USAGE;
                        }
                    },
                    (None, None) => unreachable!("clap requires one of them"),
                };
                infer_source(&source, trace, stdout, stderr)
            }
            Command::Repl => repl(stdin, stdout, stderr, interactive),
        },
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                let _ = write!(stdout, "{}", e.render());
                EXIT_OK
            }
            _ => {
                let _ = write!(stderr, "{}", e.render());
                EXIT_USAGE
            }
        },
    };
    let _ = stdout.flush();
    let _ = stderr.flush();
    code
}

/// Parses, types and prints one term; returns the exit code for it.
pub fn infer_source(
    source: &str,
    trace: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let term = match parse(source) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "parse error: {e}");
            return EXIT_PARSE_ERROR;
        }
    };
    let mut engine = if trace {
        Engine::with_trace()
    } else {
        Engine::new()
    };
    let result = engine.infer(&term);
    if trace {
        let _ = write!(stdout, "{}", format_trace(&engine.take_trace()));
    }
    match result {
        Ok(ty) => {
            let _ = writeln!(stdout, "inferred: {}", print_type(&ty));
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "type error: {e}");
            EXIT_TYPE_ERROR
        }
    }
}

fn repl(
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    interactive: bool,
) -> i32 {
    let mut line = String::new();
    loop {
        if interactive {
            let _ = write!(stdout, "> ");
            let _ = stdout.flush();
        }
        line.clear();
        match stdin.read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_USAGE;
            }
        }
        let input = line.trim();
        if input == ":q" {
            break;
        }
        if input.is_empty() {
            continue;
        }
        infer_source(input, false, stdout, stderr);
        let _ = stderr.flush();
    }
    EXIT_OK
}
