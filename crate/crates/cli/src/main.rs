//! `drinfeld`: command-line front end for drinfeld-core.
//!
//! Exit codes: 0 success (including empty results), 1 verification failure,
//! 2 input error, 3 resource cap exceeded.

mod commands;
mod document;
mod error;
mod report;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use drinfeld_core::Caps;

use crate::document::Input;
use crate::error::CliError;
use crate::report::Report;

#[derive(Parser)]
#[command(name = "drinfeld", version, about = "Drinfeld modules, abelian sheaves and shtukas over finite fields")]
struct Cli {
    /// Machine-readable JSON report.
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Human-readable report (default).
    #[arg(long, global = true)]
    text: bool,
    /// Worker threads for parallel scans; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest field that may be constructed.
    #[arg(long, global = true, default_value_t = Caps::default().field_size)]
    field_cap: u64,
    /// Largest candidate space for extension searches.
    #[arg(long, global = true, default_value_t = Caps::default().candidates)]
    candidate_cap: u64,
    /// Largest solution space enumerated by the matrix solvers.
    #[arg(long, global = true, default_value_t = Caps::default().solution_space)]
    solution_cap: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Files {
    /// Input documents; a job document may bundle several.
    #[arg(required = true)]
    files: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify every document.
    Verify(Files),
    /// Restrict coefficients of a module along a cover.
    Restrict {
        #[command(flatten)]
        files: Files,
        /// Also write the resulting document here.
        #[arg(long)]
        out: Option<String>,
    },
    /// Push a module, ladder or shtuka forward along a cover.
    Push {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        out: Option<String>,
    },
    /// Enumerate extensions of a module along a cover.
    Extend {
        #[command(flatten)]
        files: Files,
        /// Partition the extensions into isomorphism classes.
        #[arg(long)]
        classes: bool,
        /// Tabulate solutions and classes over extensions of degree up to S.
        #[arg(long, value_name = "S")]
        galois: Option<usize>,
    },
    /// Isomorphisms between two modules, ladders or shtukas.
    Isom {
        #[command(flatten)]
        files: Files,
        /// When none exist, search extensions of degree up to S.
        #[arg(long, value_name = "S")]
        twist: Option<usize>,
    },
    /// Automorphism group of a module.
    Aut(Files),
    /// Smallest extension degree over which two objects become isomorphic.
    Twist {
        #[command(flatten)]
        files: Files,
        #[arg(long, default_value_t = 4)]
        s_max: usize,
    },
    /// The abelian-sheaf ladder of a module.
    Motive {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        out: Option<String>,
    },
    /// Module structures of a ladder over the cover's coordinate ring.
    SheafStructures(Files),
    /// Randomized consistency checks of the library.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        rounds: usize,
    },
}

fn load_all(files: &Files) -> Result<Vec<Input>, CliError> {
    files.files.iter().map(|f| document::load(f)).collect()
}

fn write_out(out: &Option<String>, doc: Option<serde_json::Value>) -> Result<(), CliError> {
    if let (Some(path), Some(doc)) = (out, doc) {
        let text = serde_json::to_string_pretty(&doc).expect("documents serialize") + "\n";
        fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source })?;
    }
    Ok(())
}

fn run(cli: &Cli, echo: Vec<String>) -> Result<Report, CliError> {
    let caps = Caps {
        field_size: cli.field_cap,
        candidates: cli.candidate_cap,
        solution_space: cli.solution_cap,
    };
    let start = |files: &Files| -> Result<(Report, Vec<Input>), CliError> {
        let inputs = load_all(files)?;
        Ok((Report::new(echo.clone(), &inputs), inputs))
    };
    match &cli.command {
        Command::Verify(f) => {
            let (r, inputs) = start(f)?;
            commands::verify(r, &inputs)
        }
        Command::Restrict { files, out } | Command::Push { files, out } => {
            let (r, inputs) = start(files)?;
            let (r, doc) = commands::push(r, &inputs)?;
            write_out(out, doc)?;
            Ok(r)
        }
        Command::Extend { files, classes, galois } => {
            let (r, inputs) = start(files)?;
            commands::extend(r, &inputs, caps, *classes, *galois)
        }
        Command::Isom { files, twist } => {
            let (r, inputs) = start(files)?;
            commands::isom(r, &inputs, caps, *twist)
        }
        Command::Aut(f) => {
            let (r, inputs) = start(f)?;
            commands::aut(r, &inputs)
        }
        Command::Twist { files, s_max } => {
            let (r, inputs) = start(files)?;
            commands::twist(r, &inputs, caps, *s_max)
        }
        Command::Motive { files, out } => {
            let (r, inputs) = start(files)?;
            let (r, doc) = commands::motive(r, &inputs)?;
            write_out(out, doc)?;
            Ok(r)
        }
        Command::SheafStructures(f) => {
            let (r, inputs) = start(f)?;
            commands::sheaf_structures(r, &inputs, caps)
        }
        Command::Selftest { seed, rounds } => commands::selftest(Report::new(echo, &[]), *seed, *rounds),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let clock = Instant::now();
    let outcome = run(&cli, echo);
    eprintln!("elapsed: {:.3} s", clock.elapsed().as_secs_f64());
    match outcome {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.to_json()).expect("reports serialize"));
            } else {
                print!("{}", report.to_text());
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
