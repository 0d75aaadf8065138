use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use privcode::bounds::BoundsOptions;
use privcode::codec::{CodingMode, SplitVariant};
use privcode::harness::{
    atom_budget, cmd_bounds, cmd_codec, cmd_example1, cmd_example2, cmd_selftest,
    load_distribution, load_separation, CodecRequest, ExperimentReport, Fault, SchemeChoice,
};

#[derive(Parser)]
#[command(
    name = "privcode",
    version,
    about = "Keyed source coding under an information leakage budget",
    after_help = "Set PRIVCODE_ATOM_BUDGET to change the audit atom limit (default 10000000).\nExit status: 0 pass, 1 usage or input error, 2 bound, 3 leakage, 4 losslessness violation."
)]
struct Cli {
    /// Record wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Eps,
    Split,
    Functional,
}

#[derive(Clone, Copy, ValueEnum)]
enum UMode {
    Huffman,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pad {
    X2,
    X1,
}

#[derive(Clone, Copy, ValueEnum)]
enum InjectFault {
    BrokenHuffman,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every bound on a distribution.
    Bounds {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Separation file for the split bounds.
        #[arg(long)]
        sep: Option<PathBuf>,
    },
    /// Build a scheme, audit it exactly and compare against the bounds.
    Codec {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_enum)]
        scheme: Scheme,
        /// `auto` or a separation file.
        #[arg(long, default_value = "auto")]
        sep: String,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "huffman")]
        umode: UMode,
        /// Which factor the split scheme pads.
        #[arg(long, value_enum, default_value = "x2")]
        pad: Pad,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Fraction-of-ones instance on n fair bits.
    Example1 {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        eps: f64,
    },
    /// Twelve-symbol separation instance.
    Example2,
    /// Seeded invariant suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, value_enum)]
        inject: Option<InjectFault>,
    },
}

fn run(cli: &Cli) -> Result<(ExperimentReport, Option<String>)> {
    let budget = atom_budget();
    let report = match &cli.command {
        Command::Bounds {
            dist,
            eps,
            format,
            sep,
        } => {
            let j = load_distribution(dist)?;
            let split = sep.as_deref().map(|p| load_separation(p, &j)).transpose()?;
            let r = cmd_bounds(
                &j,
                *eps,
                &BoundsOptions {
                    split,
                    ..Default::default()
                },
            )?;
            if let Format::Csv = format {
                let csv = r.bounds.as_ref().expect("bounds present").to_csv()?;
                return Ok((r, Some(csv)));
            }
            r
        }
        Command::Codec {
            dist,
            scheme,
            sep,
            eps,
            seed,
            umode,
            pad,
            samples,
        } => {
            let j = load_distribution(dist)?;
            let separation = match sep.as_str() {
                "auto" => None,
                path => Some(
                    load_separation(path.as_ref(), &j)
                        .with_context(|| format!("loading {path}"))?,
                ),
            };
            let req = CodecRequest {
                scheme: match scheme {
                    Scheme::Eps => SchemeChoice::Eps,
                    Scheme::Split => SchemeChoice::Split,
                    Scheme::Functional => SchemeChoice::Functional,
                },
                separation,
                eps: *eps,
                seed: *seed,
                mode: match umode {
                    UMode::Huffman => CodingMode::Huffman,
                    UMode::Fixed => CodingMode::FixedLength,
                },
                variant: match pad {
                    Pad::X2 => SplitVariant::OtpX2,
                    Pad::X1 => SplitVariant::OtpX1,
                },
                samples: *samples,
            };
            cmd_codec(&j, &req, budget)?
        }
        Command::Example1 { n, eps } => cmd_example1(*n, *eps, budget)?,
        Command::Example2 => cmd_example2(budget)?,
        Command::Selftest {
            seed,
            trials,
            inject,
        } => {
            let fault = inject.map(|InjectFault::BrokenHuffman| Fault::BrokenHuffman);
            cmd_selftest(*seed, *trials, fault)?
        }
    };
    Ok((report, None))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok((mut report, csv)) => {
            if cli.timing {
                report.wall_clock_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            match csv {
                Some(text) => print!("{text}"),
                None => println!("{}", report.to_json()),
            }
            for v in report.verdicts.iter().filter(|v| !v.pass) {
                eprintln!(
                    "FAIL {} ({} of {}): {}",
                    v.name, v.failures, v.cases, v.detail
                );
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
