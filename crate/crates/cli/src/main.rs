//! `skywatch`: batch front end for the drone-monitoring toolkit.

mod augment;
mod demo;
mod eval;
mod exit;
mod gan;
mod manifest;
mod monitor;
mod residual;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "skywatch", version, about = "Synthetic augmentation, residual video, fused tracking and evaluation")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Composite foreground drones onto backgrounds with auto-labelled boxes.
    Augment(augment::Args),
    /// Absolute frame differences, optionally pan-compensated.
    Residual(residual::Args),
    /// Run the fused detector/tracker monitor on a frame directory.
    Monitor(monitor::Args),
    /// Success curve and AUC of tracking output.
    EvalTrack(eval::TrackArgs),
    /// Precision-recall curve and AUC of detections.
    EvalDetect(eval::DetectArgs),
    /// Evaluate the adversarial augmentation losses on tensor literals.
    GanLoss(gan::Args),
    /// Write the bundled synthetic scenario and run all monitor modes on it.
    Demo(demo::Args),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(exit::USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(exit::IO);
        }
    }

    let result = match cli.command {
        Command::Augment(a) => augment::run(a),
        Command::Residual(a) => residual::run(a),
        Command::Monitor(a) => monitor::run(a),
        Command::EvalTrack(a) => eval::run_track(a),
        Command::EvalDetect(a) => eval::run_detect(a),
        Command::GanLoss(a) => gan::run(a),
        Command::Demo(a) => demo::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code_for(&e))
        }
    }
}
