//! Command-line front end for `flatfix`.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use flatfix::io::{
    compare_document, compute_document, oracle_document, InputDocument, Problem, ResultDocument, Selection,
    ValidationDoc,
};
use flatfix::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "flatfix", version, about = "Fixed point invariants of n-valued maps on flat manifolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, env = "FLATFIX_FORMAT", default_value = "json")]
    pub format: Format,

    /// Worker threads for the parallel parts.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the group, the morphism and the lift.
    Validate { input: PathBuf },
    /// Compute invariants from the algebraic data.
    Compute {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        invariant: Invariant,
    },
    /// Enumerate fixed points of the lift.
    Oracle { input: PathBuf },
    /// Run both pipelines and compare.
    Compare { input: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Invariant {
    Lefschetz,
    Nielsen,
    Trace,
    All,
}

impl Invariant {
    fn selection(self) -> Selection {
        match self {
            Invariant::Lefschetz => Selection { lefschetz: true, nielsen: false, trace: false },
            Invariant::Nielsen => Selection { lefschetz: false, nielsen: true, trace: false },
            Invariant::Trace => Selection { lefschetz: false, nielsen: false, trace: true },
            Invariant::All => Selection::ALL,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => EXIT_IO,
        Error::NonInteger(_) | Error::Inconsistency(_) | Error::DegenerateFixedSet(_) => EXIT_INCONSISTENT,
        _ => EXIT_INVALID,
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

fn load(path: &PathBuf) -> Result<Problem, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure { code: EXIT_IO, message: format!("cannot read {}: {e}", path.display()) })?;
    Ok(InputDocument::from_json(&text)?.build()?)
}

fn emit(cli: &Cli, body: String) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => fs::write(path, body)
            .map_err(|e| Failure { code: EXIT_IO, message: format!("cannot write {}: {e}", path.display()) }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure { code: EXIT_IO, message: e.to_string() })
        }
    }
}

fn render(cli: &Cli, d: &ResultDocument) -> String {
    match cli.format {
        Format::Json => d.to_json(),
        Format::Text => d.to_text(),
    }
}

fn execute(cli: &Cli) -> Result<i32, Failure> {
    let input = match &cli.command {
        Command::Validate { input } | Command::Compute { input, .. } | Command::Oracle { input } | Command::Compare { input } => input,
    };
    let problem = load(input)?;
    let validation = problem.validate()?;
    let vdoc = ValidationDoc::from(&validation);
    if let Command::Validate { .. } = cli.command {
        emit(cli, if cli.format == Format::Json { vdoc.to_json() } else { vdoc.to_text() })?;
        return Ok(if vdoc.valid { EXIT_OK } else { EXIT_INVALID });
    }
    if !vdoc.valid {
        return Err(Failure { code: EXIT_INVALID, message: vdoc.violations.join("\n") });
    }
    for w in &vdoc.warnings {
        eprintln!("warning: {w}");
    }
    match &cli.command {
        Command::Compute { invariant, .. } => {
            let d = compute_document(&problem, invariant.selection())?;
            emit(cli, render(cli, &d))?;
            Ok(EXIT_OK)
        }
        Command::Oracle { .. } => {
            let d = oracle_document(&problem, vdoc.warnings)?;
            emit(cli, render(cli, &d))?;
            Ok(EXIT_OK)
        }
        Command::Compare { .. } => {
            let d = compare_document(&problem, vdoc.warnings)?;
            emit(cli, render(cli, &d))?;
            let agree = d.comparison.as_ref().is_some_and(|c| c.agree);
            Ok(if agree { EXIT_OK } else { EXIT_MISMATCH })
        }
        Command::Validate { .. } => unreachable!("handled above"),
    }
}

fn execute_in_pool(cli: &Cli) -> Result<i32, Failure> {
    #[cfg(feature = "parallel")]
    if let Some(k) = cli.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Failure { code: EXIT_INVALID, message: format!("cannot start {k} threads: {e}") })?;
        return pool.install(|| execute(cli));
    }
    execute(cli)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute_in_pool(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
