use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tecnet_core::synthetic::CouplingSpec;
use tecnet_core::{pipeline, render_report, Error, ErrorKind, Execution, RunConfig};

#[derive(Parser)]
#[command(name = "tecnet", version, about = "Transfer-entropy causality networks between market indices")]
struct Cli {
    /// Suppress progress output.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Force single-threaded evaluation.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline described by a config file.
    Run {
        #[arg(long, short)]
        config: PathBuf,
        /// Output directory (overrides `out` in the config).
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Number of quantile bins (overrides `bins`).
        #[arg(long)]
        bins: Option<usize>,
        /// Window length in months (overrides `window_months`).
        #[arg(long)]
        window: Option<usize>,
    },
    /// Write a simulated VAR(1) price panel.
    Synth {
        /// Coupling spec TOML; the ten-market demo when omitted.
        #[arg(long, short)]
        spec: Option<PathBuf>,
        /// Destination price CSV.
        #[arg(long, short)]
        out: PathBuf,
        /// Trading days to simulate.
        #[arg(long, default_value_t = pipeline::DEFAULT_SYNTH_LENGTH)]
        length: usize,
        /// Seed (overrides the spec).
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the market list as TOML here.
        #[arg(long)]
        markets_out: Option<PathBuf>,
    },
    /// Print a human-readable summary of a run directory.
    Report { run_dir: PathBuf },
}

fn exit_code(kind: ErrorKind) -> ExitCode {
    match kind {
        ErrorKind::Config => ExitCode::from(2),
        ErrorKind::Data => ExitCode::from(3),
        ErrorKind::Internal => ExitCode::from(4),
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    exit_code(e.kind())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(n) = std::env::var("TECNET_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if !tecnet_core::par::configure_threads(n) && !cli.quiet {
                    eprintln!("warning: TECNET_THREADS={n} ignored");
                }
            }
            _ => {
                eprintln!("error: TECNET_THREADS must be a positive integer, got '{n}'");
                return ExitCode::from(2);
            }
        }
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::default() };

    match cli.command {
        Command::Run { config, out, bins, window } => {
            let mut cfg = match RunConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            if let Some(out) = out {
                cfg.out = out;
            }
            if let Some(b) = bins {
                cfg.bins = b;
            }
            if let Some(w) = window {
                cfg.window_months = w;
            }
            match pipeline::run(&cfg, exec) {
                Ok(res) => {
                    if !cli.quiet {
                        eprintln!(
                            "{} segments, {} artifacts written to {}",
                            res.te.len(),
                            res.manifest.artifacts.len(),
                            res.out_dir.display()
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(f) => {
                    eprintln!("error: {f}");
                    exit_code(f.error.kind())
                }
            }
        }
        Command::Synth { spec, out, length, seed, markets_out } => {
            let spec = match spec {
                Some(path) => match CouplingSpec::load(&path) {
                    Ok(s) => s,
                    Err(e) => return fail(&e),
                },
                None => CouplingSpec::ten_market_demo(0),
            };
            let spec = match seed {
                Some(seed) => CouplingSpec { seed, ..spec },
                None => spec,
            };
            match pipeline::synthesize(&spec, length, &out, markets_out.as_deref()) {
                Ok(()) => {
                    if !cli.quiet {
                        eprintln!("{length} days x {} markets written to {}", spec.markets.len(), out.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Report { run_dir } => match render_report(&run_dir) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
    }
}
