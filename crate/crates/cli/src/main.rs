use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use k3lat_cli::{
    cmd_check, cmd_lattice_info, cmd_lemma_sweep, cmd_perturb, cmd_sample_density, cmd_verify, parse_epsilon,
    CliError, SampleOptions,
};

#[derive(Parser)]
#[command(name = "k3lat", version, about = "Lattice planes with square discriminant mod p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank, determinant, signature and Gram matrix of Λ_d.
    LatticeInfo {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Property R of a plane, on the stored and on the saturated basis.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perturb a plane into one with Property R and write a certificate.
    Perturb {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value = "1/100")]
        epsilon: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay a certificate file.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// CSV table of residue-lemma solutions for primes 5 ≤ p ≤ p_max.
    LemmaSweep {
        #[arg(long)]
        p_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the engine on seeded random planes and summarize.
    Sample {
        #[arg(long)]
        d: i64,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value = "1/100")]
        epsilon: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep only planes whose restricted form is positive definite.
        #[arg(long)]
        require_posdef: bool,
        #[arg(long, default_value_t = 10_000_000)]
        max_draws: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))?,
        None => match writeln!(io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => return Err(e.into()),
            _ => {}
        },
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::LatticeInfo { d, out } => emit(&cmd_lattice_info(d)?, out.as_deref()),
        Command::Check { input, p, out } => emit(&cmd_check(&read(&input)?, p)?, out.as_deref()),
        Command::Perturb {
            input,
            p,
            epsilon,
            out,
        } => {
            let epsilon = parse_epsilon(&epsilon)?;
            let (text, status) = cmd_perturb(&read(&input)?, p, &epsilon)?;
            emit(&text, out.as_deref())?;
            status
        }
        Command::Verify { input } => emit(&cmd_verify(&read(&input)?)?, None),
        Command::LemmaSweep { p_max, out } => match out {
            Some(path) => cmd_lemma_sweep(p_max, fs::File::create(path)?),
            None => cmd_lemma_sweep(p_max, io::stdout().lock()),
        },
        Command::Sample {
            d,
            p,
            trials,
            epsilon,
            seed,
            require_posdef,
            max_draws,
            out,
        } => {
            let opts = SampleOptions {
                d,
                p,
                trials,
                epsilon: parse_epsilon(&epsilon)?,
                seed,
                require_posdef,
                max_draws,
            };
            emit(&cmd_sample_density(&opts)?, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("K3LAT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
