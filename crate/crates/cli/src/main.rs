use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvsat::{effective, fmt_num, postselect, rate_estimate, sweep, validate, CliError, RunOptions, Scenario, Table};

#[derive(Parser)]
#[command(name = "cvsat", version, about = "Gaussian entanglement over fading satellite links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// E_LN surface over (scheme, sigma_b, r, chi).
    Sweep(RunArgs),
    /// Classical and quantum post-selection tables for the direct scheme.
    Postselect(RunArgs),
    /// Effective squeezing and transmissivities with the scheme-ordering flags.
    Effective(RunArgs),
    /// Convergence, physicality and Monte Carlo checks; JSON report.
    Validate(RunArgs),
    /// Pair rate from a success probability and a source rate.
    Rate {
        #[arg(long)]
        p: f64,
        #[arg(long = "tx-hz")]
        tx_hz: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    scenario: PathBuf,
    /// Output file (default stdout, or the scenario's `output` key).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "quad-nodes")]
    quad_nodes: Option<usize>,
    #[arg(long = "quad-subdiv")]
    quad_subdiv: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> Result<(Scenario, RunOptions), CliError> {
        let s = Scenario::from_path(&self.scenario)?.with_quad(self.quad_nodes, self.quad_subdiv)?;
        Ok((
            s,
            RunOptions {
                workers: self.workers,
                seed: self.seed,
            },
        ))
    }

    fn sink(&self, s: &Scenario) -> Result<Box<dyn Write>, CliError> {
        Ok(match self.out.as_ref().or(s.output.as_ref()) {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn emit(args: &RunArgs, run: fn(&Scenario, RunOptions) -> Result<Table, CliError>) -> Result<(), CliError> {
    let (s, opts) = args.load()?;
    let table = run(&s, opts)?;
    table.write_to(args.sink(&s)?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => emit(a, sweep),
        Command::Postselect(a) => emit(a, postselect),
        Command::Effective(a) => emit(a, effective),
        Command::Validate(a) => (|| {
            let (s, opts) = a.load()?;
            let report = validate(&s, opts)?;
            let mut out = a.sink(&s)?;
            serde_json::to_writer_pretty(&mut out, &report.to_json(s.name.as_deref())).map_err(io::Error::from)?;
            writeln!(out)?;
            out.flush()?;
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Validation(report.failures.len()))
            }
        })(),
        Command::Rate { p, tx_hz } => rate_estimate(*p, *tx_hz).map(|hz| println!("{}", fmt_num(hz))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cvsat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
