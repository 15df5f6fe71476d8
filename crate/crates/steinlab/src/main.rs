//! Command-line front end: one subcommand per experiment, machine-readable
//! CSV (default) or JSON output, deterministic for identical invocations.
//!
//! Exit codes: 0 pass or not-applicable, 1 verdict fail, 2 usage error,
//! 3 numerical non-convergence.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use steinlab::experiments::{
    cmd_bounds, cmd_clt, cmd_constants, cmd_jump, cmd_moments, cmd_sharpness, cmd_solve,
    SolveRequest, DEFAULT_A_LADDER, DEFAULT_N_CLT, DEFAULT_N_MOMENTS,
};
use steinlab::report::{ExperimentReport, Verdict};
use steinlab::{QuadratureSpec, Side, SteinError};

#[derive(Parser)]
#[command(
    name = "steinlab",
    version,
    about = "Numerical laboratory for the standard normal Stein equation",
    disable_help_flag = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    output: OutputArgs,

    /// Print help
    #[arg(long, action = clap::ArgAction::Help, global = true)]
    help: Option<bool>,
}

#[derive(Args)]
struct OutputArgs {
    /// Emit a single JSON document instead of CSV
    #[arg(long, global = true)]
    json: bool,

    /// Override the experiment's primary verdict tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Write the report to a file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
    Two,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
            SideArg::Two => Side::TwoSided,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Bound constants 1/k, c_k, 2 and the kernel-integral cross-check
    Constants {
        /// Largest class index k
        #[arg(long = "k", default_value_t = 10)]
        k: usize,
    },
    /// Ramp-family sharpness of the middle bound at x = 0
    Sharpness {
        #[arg(long = "k", default_value_t = 1)]
        k: usize,
        /// Ramp half-widths, descending (comma separated)
        #[arg(long = "a", value_delimiter = ',', num_args = 1..)]
        a: Option<Vec<f64>>,
    },
    /// One-sided jump of f^{(k+1)} at 0 and the divergence ladder
    Jump {
        #[arg(long = "k", default_value_t = 1)]
        k: usize,
    },
    /// Moment identity for W_n under exact convolution
    Moments {
        #[arg(long = "p", default_value_t = 3)]
        p: usize,
        /// Built-in distribution: rademacher | twopoint_asym
        #[arg(long = "dist", default_value = "rademacher")]
        dist: String,
        /// Sample counts n (comma separated)
        #[arg(long = "n", value_delimiter = ',', num_args = 1..)]
        n: Option<Vec<usize>>,
    },
    /// Smooth-function CLT bound comparison
    Clt {
        #[arg(long = "p", default_value_t = 3)]
        p: usize,
        #[arg(long = "dist", default_value = "rademacher")]
        dist: String,
        /// Test-function family: ramp | smooth_probe
        #[arg(long = "h", default_value = "smooth_probe")]
        h: String,
        #[arg(long = "n", value_delimiter = ',', num_args = 1..)]
        n: Option<Vec<usize>>,
    },
    /// Sup-norm bound suite at orders k-1, k, k+1
    Bounds {
        #[arg(long = "k", default_value_t = 1)]
        k: usize,
        /// Test-function family: ramp | smooth_probe
        #[arg(long = "h", default_value = "smooth_probe")]
        h: String,
        /// Ramp half-width
        #[arg(long = "a", default_value_t = 1.0)]
        a: f64,
    },
    /// Evaluate f_h^{(j)} pointwise
    Solve {
        /// Test-function family: ramp | abs | monomial | smooth_probe
        #[arg(long = "h", default_value = "monomial")]
        h: String,
        #[arg(long = "k", default_value_t = 3)]
        k: usize,
        /// Ramp half-width (ramp only)
        #[arg(long = "a", default_value_t = 1.0)]
        a: f64,
        /// Monomial exponent (monomial only; h(x) = x^{p+1})
        #[arg(long = "p", default_value_t = 1)]
        p: u32,
        /// Derivative order (0..=k+1)
        #[arg(long = "j", default_value_t = 0)]
        j: usize,
        /// Evaluation points (comma separated)
        #[arg(long = "x", value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
        x: Vec<f64>,
        /// One-sided limit at kinks of h^{(k)}
        #[arg(long = "side", value_enum, default_value_t = SideArg::Two)]
        side: SideArg,
    },
}

fn configure_threads() {
    if let Ok(v) = std::env::var("STEINLAB_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => {
                eprintln!("steinlab: ignoring invalid STEINLAB_THREADS={v}");
            }
        }
    }
}

fn run(command: &Command, tol: Option<f64>) -> Result<ExperimentReport, SteinError> {
    let spec = QuadratureSpec::default();
    match command {
        Command::Constants { k } => cmd_constants(*k, tol, &spec),
        Command::Sharpness { k, a } => {
            let ladder = a.clone().unwrap_or_else(|| DEFAULT_A_LADDER.to_vec());
            cmd_sharpness(*k, &ladder, tol, &spec)
        }
        Command::Jump { k } => cmd_jump(*k, tol, &spec),
        Command::Moments { p, dist, n } => {
            let ns = n.clone().unwrap_or_else(|| DEFAULT_N_MOMENTS.to_vec());
            cmd_moments(*p, dist, &ns, tol, &spec)
        }
        Command::Clt { p, dist, h, n } => {
            let ns = n.clone().unwrap_or_else(|| DEFAULT_N_CLT.to_vec());
            cmd_clt(*p, dist, h, &ns, tol, &spec)
        }
        Command::Bounds { k, h, a } => cmd_bounds(*k, h, *a, tol, &spec),
        Command::Solve {
            h,
            k,
            a,
            p,
            j,
            x,
            side,
        } => cmd_solve(
            &SolveRequest {
                h_name: h.clone(),
                k: *k,
                a: *a,
                p: *p,
                j: *j,
                x_list: x.clone(),
                side: (*side).into(),
            },
            &spec,
        ),
    }
}

fn emit(report: &ExperimentReport, output: &OutputArgs) -> std::io::Result<()> {
    let text = if output.json {
        report.to_json()
    } else {
        report.to_csv()
    };
    match &output.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(&cli.command, cli.output.tol) {
        Ok(report) => {
            if let Err(e) = emit(&report, &cli.output) {
                eprintln!("steinlab: cannot write report: {e}");
                return ExitCode::from(2);
            }
            match report.verdict {
                Verdict::Pass | Verdict::NotApplicable => ExitCode::SUCCESS,
                Verdict::Fail => ExitCode::from(1),
            }
        }
        Err(e) => {
            eprintln!("steinlab: {e}");
            match e {
                SteinError::NotConverged { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
