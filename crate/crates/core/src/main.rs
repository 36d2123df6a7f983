use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qbm_core::cli::{emit_ellipse, parse_config, run, write_ellipse_csv};
use qbm_core::oracle::algebra_suite;
use qbm_core::{Error, EXIT_NUMERICAL};

#[derive(Parser)]
#[command(name = "qbm", version, about = "Damped oscillator master equation: analytic solution and Fock-space cross-check")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a config file.
    Run { config: PathBuf },
    /// Write the constant-energy ellipse of the renormalized Hamiltonian.
    Ellipse {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[arg(long, default_value = "ellipse.csv")]
        out: PathBuf,
    },
    /// Check the superoperator identities on a truncated Fock space.
    Algebra {
        #[arg(long, default_value_t = 30)]
        d: usize,
        #[arg(long, default_value = "algebra_report.txt")]
        out: PathBuf,
    },
}

fn write_to(path: &PathBuf, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn execute(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Run { config } => {
            let cfg = parse_config(&config)?;
            let summary = run(&cfg)?;
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            if let Some(diff) = &summary.diff {
                print!("{diff}");
            }
            Ok(0)
        }
        Command::Ellipse { r, gamma, out } => {
            let e = emit_ellipse(r, gamma)?;
            write_to(&out, |w| write_ellipse_csv(&e, w))?;
            println!("area {:.12} tilt {:.12} -> {}", e.area(), e.tilt(), out.display());
            Ok(0)
        }
        Command::Algebra { d, out } => {
            let report = algebra_suite(d)?;
            print!("{report}");
            write_to(&out, |w| write!(w, "{report}"))?;
            Ok(if report.all_passed() { 0 } else { EXIT_NUMERICAL })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
