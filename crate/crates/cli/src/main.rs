use std::f64::consts::FRAC_PI_4;
use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use cargeom::sample::rng;
use clap::{Parser, Subcommand};
use serde::Serialize;

mod report;
mod tools;
mod verify;

use report::{Check, Report, Tolerances};
use tools::{Field, ParkArgs, SimulateArgs};
use verify::{Context, Suite};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Compute(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "invalid input: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
            Self::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cargeom", version, about = "Geometry of the car configuration space")]
struct Cli {
    /// RNG seed for every random sample.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Number of random sample points per check.
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
    /// Override a tolerance, e.g. `--tol symmetry=1e-8`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Report `elapsed_ms` as 0 so output is reproducible byte for byte.
    #[arg(long, global = true)]
    no_timing: bool,
    #[arg(long, global = true, hide = true)]
    inject_broken_generator: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a verification suite and print a JSON report.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Evaluate the Wünschmann and Chern invariants of `y''' = F(x, y, p, q)`.
    Invariants {
        /// Right-hand side in the variables x, y, p, q.
        #[arg(long)]
        ode: String,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Plan and simulate a parallel-parking maneuver.
    Park {
        /// Sideways shift; positive moves the car to its right.
        #[arg(long, allow_hyphen_values = true)]
        offset: f64,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value_t = FRAC_PI_4)]
        beta0: f64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        /// CSV trajectory output.
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate one control field from an initial configuration.
    Simulate {
        /// Initial `x,y,alpha,beta`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_init)]
        init: [f64; 4],
        #[arg(long, value_enum)]
        field: Field,
        #[arg(long, allow_hyphen_values = true)]
        time: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Map oriented circles `a,b,R` to the Lie quadric and test tangency.
    Circles {
        #[arg(required = true, allow_hyphen_values = true, value_parser = tools::parse_circle)]
        circles: Vec<cargeom::lie_sphere::OrientedCircle>,
    },
}

fn parse_init(s: &str) -> Result<[f64; 4], String> {
    tools::parse_floats::<4>(s)
}

#[derive(Serialize)]
struct Output<T: Serialize> {
    #[serde(flatten)]
    report: Report,
    #[serde(flatten)]
    body: T,
}

/// A report for `suite` extended with the command's own summary fields.
fn emit<T: Serialize>(report: Report, body: T) -> Result<bool, CliError> {
    let passed = report.passed();
    print_json(&Output { report, body })?;
    Ok(passed)
}

/// Pretty JSON on stdout; a closed pipe (`| head`) is not an error.
fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    let written = serde_json::to_writer_pretty(&mut out, value)
        .map_err(std::io::Error::from)
        .and_then(|()| writeln!(out));
    match written {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
        _ => Ok(()),
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be finite")))
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let tol = Tolerances::default()
        .with_overrides(&cli.tol)
        .map_err(CliError::Usage)?;
    let started = (!cli.no_timing).then(Instant::now);
    match cli.command {
        Command::Verify { suite } => {
            let mut ctx = Context {
                rng: rng(cli.seed),
                samples: cli.samples,
                tol,
                broken_generator: cli.inject_broken_generator,
            };
            let checks = verify::run(suite, &mut ctx);
            let report = Report::new(suite.name(), cli.seed, checks, started);
            print_json(&report)?;
            Ok(report.passed())
        }
        Command::Invariants { ode, points } => {
            let mut r = rng(cli.seed);
            let (checks, stats) = tools::invariants(&ode, points, &mut r, &tol)?;
            emit(Report::new("invariants", cli.seed, checks, started), stats)
        }
        Command::Park {
            offset,
            length,
            beta0,
            steps,
            out,
        } => {
            let args = ParkArgs {
                offset: finite("offset", offset)?,
                length: finite("length", length)?,
                beta0: finite("beta0", beta0)?,
                steps: steps.max(1),
                out: &out,
            };
            let mut summary = tools::park(&args, &tol)?;
            let checks = std::mem::take(&mut summary.checks);
            emit(Report::new("park", cli.seed, checks, started), summary)
        }
        Command::Simulate {
            init,
            field,
            time,
            steps,
            length,
            out,
        } => {
            let args = SimulateArgs {
                init,
                field,
                time: finite("time", time)?,
                steps: steps.max(1),
                length: finite("length", length)?,
                out: &out,
            };
            let summary = tools::simulate(&args)?;
            let check = Check::within("closed_form", summary.deviation, tol.get("endpoint"));
            emit(Report::new("simulate", cli.seed, vec![check], started), summary)
        }
        Command::Circles { circles } => {
            let summary = tools::circles(&circles, &tol);
            emit(Report::new("circles", cli.seed, Vec::new(), started), summary)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
