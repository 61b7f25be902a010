use std::process::ExitCode;

use ccode_cli::{solve, verify, CliError, SolveOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "ccode",
    version,
    about = "Solve linear ODEs with constant coefficients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an equation such as "y'' + 2y' + y = x*exp(-x)".
    Solve {
        equation: String,
        /// Render solutions with exp/cos/sin instead of complex exponentials.
        #[arg(long)]
        real: bool,
        /// Initial conditions at one point, e.g. "y(0)=1, y'(0)=0".
        #[arg(long)]
        ivp: Option<String>,
        /// Emit the structured report.
        #[arg(long)]
        json: bool,
        /// Skip numeric factoring: "root:multiplicity" pairs, e.g. "1:2, -1:1".
        #[arg(long)]
        roots: Option<String>,
        /// Number of sample points on [-1, 1] for the pointwise residual.
        #[arg(long, default_value_t = 50)]
        verify_points: usize,
    },
    /// Check a candidate solution by substituting it into the equation.
    Verify {
        equation: String,
        candidate: String,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 50)]
        verify_points: usize,
    },
}

fn fail(e: CliError, json: bool) -> ExitCode {
    if json {
        eprintln!("{}", e.to_json());
    } else {
        eprintln!("error[{}]: {e}", e.kind());
    }
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve {
            equation,
            real,
            ivp,
            json,
            roots,
            verify_points,
        } => {
            let opts = SolveOptions {
                real,
                ivp,
                roots,
                verify_points,
            };
            match solve(&equation, &opts) {
                Ok(out) => {
                    if json {
                        println!("{}", out.report.to_json());
                    } else {
                        print!("{}", out.report.to_text(&out.labels));
                    }
                    ExitCode::from(out.report.exit_code() as u8)
                }
                Err(e) => fail(e, json),
            }
        }
        Command::Verify {
            equation,
            candidate,
            json,
            verify_points,
        } => match verify(&equation, &candidate, verify_points) {
            Ok(report) => {
                if json {
                    println!("{}", report.to_json());
                } else {
                    print!("{}", report.to_text());
                }
                ExitCode::from(report.exit_code() as u8)
            }
            Err(e) => fail(e, json),
        },
    }
}
