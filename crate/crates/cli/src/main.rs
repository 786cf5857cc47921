use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wickchaos_cli::output::pretty;
use wickchaos_cli::verify::{cmd_verify, Level};
use wickchaos_cli::{cmd_norms, cmd_sample, cmd_solve, parse_pairs, CliError, SampleRequest};

/// Truncated chaos-expansion solver for stochastic reaction-diffusion equations.
#[derive(Parser)]
#[command(name = "wickchaos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a JSON config and write a bundle.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in invariant suites.
    Verify {
        #[arg(long, default_value = "quick")]
        level: Level,
    },
    /// Recompute weighted norms of the final snapshot of a bundle.
    Norms {
        #[arg(long)]
        bundle: PathBuf,
        /// Comma-separated r:p pairs.
        #[arg(long, default_value = "2:0,32:3")]
        pairs: String,
    },
    /// Sample realizations of a bundle at every saved time.
    Sample {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Individual sample columns to keep in the table.
        #[arg(long, default_value_t = 16)]
        columns: usize,
        /// Defaults to samples.csv inside the bundle.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| {
        CliError::Config(format!("THREADS must be a non-negative integer, got `{v}`"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Solve { config, out } => {
            let o = cmd_solve(&config, out.as_deref())?;
            let m = &o.metadata;
            if let Some(f) = &m.failure {
                eprintln!("run stopped early: {f}");
            }
            println!(
                "{:?} at t = {} after {}/{} steps; {} files in {}",
                m.status,
                m.t_reached,
                m.steps_taken,
                m.steps_planned,
                o.manifest.files.len(),
                o.dir.display()
            );
            if let Some(e) = m.closed_form_error {
                println!("closed-form error: {e:.3e}");
            }
            Ok(o.exit_code())
        }
        Command::Verify { level } => {
            let report = cmd_verify(level);
            print!("{report}");
            Ok(report.exit_code())
        }
        Command::Norms { bundle, pairs } => {
            let n = cmd_norms(&bundle, &parse_pairs(&pairs)?)?;
            print!("{}", String::from_utf8_lossy(&pretty(&n)));
            Ok(0)
        }
        Command::Sample {
            bundle,
            n,
            seed,
            columns,
            out,
        } => {
            let t = cmd_sample(&SampleRequest {
                dir: &bundle,
                n,
                seed,
                columns,
                out: out.as_deref(),
            })?;
            println!("wrote {}", t.path.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
