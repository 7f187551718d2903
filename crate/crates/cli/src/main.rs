use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use sddsep::bench::{self, ExportFormat, ExportObject, OrderingSpec, RunOptions};
use sddsep::{Execution, FunctionSpec};

#[derive(Parser)]
#[command(name = "sddsep", version, about = "SDD/OBDD separation experiments")]
struct Cli {
    /// Run on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Size table: the compressed SDD of the generalized function and the
    /// exact minimum OBDD of HWB for each n.
    Separation {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        /// x ordering: natural, reverse, or comma-separated ids.
        #[arg(long, default_value = "natural")]
        sigma: OrderingSpec,
        /// y ordering: natural, reverse, or comma-separated ids.
        #[arg(long, default_value = "natural")]
        rho: OrderingSpec,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write 0 in the timing column.
        #[arg(long)]
        deterministic: bool,
    },
    /// Sizes of the HWB SDD before and after compression.
    CompressBlowup {
        #[arg(long, default_value_t = 1)]
        from: usize,
        #[arg(long, default_value_t = 14)]
        to: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        deterministic: bool,
    },
    /// Runs every construction check at arity n.
    Verify {
        #[arg(long)]
        n: usize,
    },
    /// Writes an object as an SDD file, a vtree file, or DOT.
    Export {
        /// hwb-sdd:N, fn-sdd:N, exact:n:i[@order], prime:n:tag[@order],
        /// hwb:N[@order], vtree:hwb:N, vtree:fn:N, vtree:linear:ids
        #[arg(long)]
        object: ExportObject,
        #[arg(long, default_value = "sdd")]
        format: ExportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the DOT rendering here.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Exact minimum OBDD size over all orderings.
    MinObdd {
        /// hwb:N, exact:n:i, prime:n:tag, or ghwb:N
        #[arg(long)]
        function: FunctionSpec,
    },
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Separation {
            from,
            to,
            sigma,
            rho,
            out,
            deterministic,
        } => {
            let rows = bench::separation(from, to, &sigma, &rho, RunOptions { exec, deterministic })?;
            emit(&bench::size_csv(&rows)?, out.as_ref())?;
        }
        Command::CompressBlowup {
            from,
            to,
            out,
            deterministic,
        } => {
            let rows = bench::compress_blowup(from, to, RunOptions { exec, deterministic })?;
            emit(&bench::blowup_csv(&rows)?, out.as_ref())?;
        }
        Command::Verify { n } => {
            let report = bench::verify(n)?;
            println!("{report}");
            return Ok(report.passed());
        }
        Command::Export {
            object,
            format,
            out,
            dot,
        } => {
            emit(&bench::export(&object, format)?, out.as_ref())?;
            if let Some(p) = dot {
                emit(&bench::export(&object, ExportFormat::Dot)?, Some(&p))?;
            }
        }
        Command::MinObdd { function } => {
            let m = bench::min_obdd(&function, exec)?;
            println!("{}", bench::format_min_obdd(&function, &m));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
