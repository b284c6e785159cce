use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use topometric::config::default_params;
use topometric::experiment::{generate, run_experiment, sweep};
use topometric::{Error, ExperimentSpec};
use topometric_core::simulator::PathKind;

#[derive(Parser)]
#[command(
    name = "topometric",
    version,
    about = "Topometric localization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a spec file.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeat an experiment over several values of one parameter.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated list.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a scenario bundle.
    Gen {
        #[arg(long, default_value = "loop")]
        kind: String,
        #[arg(long, default_value_t = 262.0)]
        length: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { spec, out } => {
            let spec = ExperimentSpec::load(&spec)?;
            let o = run_experiment(&spec, &out)?;
            println!(
                "metric {:.4} % {:.6} deg/m | topometric {:.4} % {:.6} deg/m",
                o.metric_report.avg_translation_pct,
                o.metric_report.avg_rotation_deg_per_m,
                o.topometric_report.avg_translation_pct,
                o.topometric_report.avg_rotation_deg_per_m,
            );
        }
        Command::Sweep {
            spec,
            param,
            values,
            out,
        } => {
            let spec = ExperimentSpec::load(&spec)?;
            let values: Vec<String> = values
                .into_iter()
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            for r in sweep(&spec, &param, &values, &out)? {
                println!(
                    "{param}={} {:.4} % {:.6} deg/m",
                    r.value, r.trans_pct, r.rot_deg_per_m
                );
            }
        }
        Command::Gen {
            kind,
            length,
            step,
            seed,
            out,
        } => {
            let kind: PathKind = kind
                .parse()
                .map_err(|_| Error::Config(format!("kind: unknown path kind {kind:?}")))?;
            let sc = generate(&default_params(kind, length, step, seed), &out)?;
            println!(
                "{} poses, {} nodes, {} detections",
                sc.ground_truth.len(),
                sc.map.len(),
                sc.detections.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
