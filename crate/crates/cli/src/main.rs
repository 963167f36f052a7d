use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod detect;
mod error;
mod io;
mod plots;
mod scenarios;
mod train;

use config::{DemoArgs, DetectArgs, DetectConfig, PlotArgs, ScenarioArgs, ScenarioConfig, TrainArgs, TrainConfig};
use error::CliResult;

/// Rashomon-set analysis of binary classifiers via partial-dependence profiles.
#[derive(Parser)]
#[command(name = "rashomon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model population over a hyperparameter grid.
    Train(TrainArgs),
    /// Build the Rashomon set and select its most different models.
    Detect(DetectArgs),
    /// Compare the disparity measures on synthetic profile pairs.
    Scenarios(ScenarioArgs),
    /// Render SVG plots from a `detect` output directory.
    ExportPlots(PlotArgs),
    /// Write the synthetic clinical cohort as CSV.
    DemoData(DemoArgs),
}

fn demo_data(args: DemoArgs) -> CliResult<()> {
    let data = rashomon_core::demo::clinical_cohort(args.rows, args.seed)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        io::create_dir(dir)?;
    }
    data.save_csv(&args.out)?;
    println!("wrote {} rows to {}", data.n_rows(), args.out.display());
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Train(a) => train::run(TrainConfig::resolve(a)?),
        Command::Detect(a) => detect::run(DetectConfig::resolve(a)?),
        Command::Scenarios(a) => scenarios::run(ScenarioConfig::resolve(a)?),
        Command::ExportPlots(a) => plots::run(a),
        Command::DemoData(a) => demo_data(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
