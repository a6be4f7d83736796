use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hbfsm::app::{execute, Command, ConfigSource, Invocation};
use hbfsm::config::SnrGrid;
use hbfsm::{AppError, Overrides};

/// Hybrid-beamforming spatial modulation experiments.
///
/// Exit codes: 0 success, 1 IO error, 2 invalid config or arguments,
/// 3 simulation failure.
#[derive(Parser, Debug)]
#[command(name = "hbfsm", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// BER against SNR for every `[[curves]]` entry.
    Ber(Common),
    /// BER curves plus SNR gain over the reference curve at `run.target_ber`.
    Compare(Common),
    /// Per-user exact rate and bounds against SNR.
    Rate(Common),
    /// Chordal-distance quantization study of the `[quantization]` section.
    Quantization(Common),
    /// Power-scaling factor per curve and the transmit power it yields.
    Beta {
        #[command(flatten)]
        common: Common,
        /// Fresh channel draws for the power check.
        #[arg(long, default_value_t = 100_000)]
        check_realizations: usize,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML experiment file.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset instead of a file (fig2, fig3, fig4).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// SNR grid in dB: `start:stop:step` or `a,b,c`.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    /// Channel uses per SNR point.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Skip the SVG plot.
    #[arg(long)]
    no_plot: bool,
}

fn invocation(cli: Cli) -> Result<Invocation, AppError> {
    let (command, c) = match cli.command {
        Sub::Ber(c) => (Command::Ber, c),
        Sub::Compare(c) => (Command::Compare, c),
        Sub::Rate(c) => (Command::Rate, c),
        Sub::Quantization(c) => (Command::Quantization, c),
        Sub::Beta {
            common,
            check_realizations,
        } => (Command::Beta { check_realizations }, common),
    };
    let source = match (c.config, c.preset) {
        (Some(p), _) => ConfigSource::File(p),
        (None, Some(name)) => ConfigSource::Preset(name),
        (None, None) => unreachable!("clap requires one of them"),
    };
    Ok(Invocation {
        command,
        source,
        overrides: Overrides {
            seed: c.seed,
            snr: c.snr.as_deref().map(SnrGrid::parse).transpose()?,
            uses_per_point: c.trials,
            workers: c.workers,
        },
        out: c.out,
        plot: !c.no_plot,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match invocation(cli).and_then(|inv| execute(&inv)) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
