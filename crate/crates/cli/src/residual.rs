use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use skywatch_core::imaging::{load_frame_dir, save_frame_dir};
use skywatch_core::residual::{residual_sequence, FrameSequence};

use crate::exit;
use crate::manifest::{create_dir, write_json, RunManifest};

#[derive(clap::Args)]
pub struct Args {
    /// Directory of numbered frames.
    #[arg(long)]
    frames: PathBuf,
    /// Output directory for residual frames and `shifts.json`.
    #[arg(long)]
    out: PathBuf,
    /// Cancel integer camera pans before differencing.
    #[arg(long)]
    compensate: bool,
    /// Search radius in pixels for pan compensation.
    #[arg(long, default_value_t = 4)]
    radius: u32,
}

#[derive(Serialize)]
struct ShiftRecord {
    frame: usize,
    dx: i32,
    dy: i32,
}

#[derive(Serialize)]
struct Sidecar {
    compensate: bool,
    radius: u32,
    shifts: Vec<ShiftRecord>,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let started = Instant::now();
    let frames = load_frame_dir(&args.frames)?;
    if frames.is_empty() {
        return Err(exit::data(format!("no frames found in {}", args.frames.display())));
    }
    let seq = FrameSequence::new(frames, 30.0)?;
    let out = residual_sequence(&seq, args.compensate, args.radius)?;

    create_dir(&args.out)?;
    save_frame_dir(&args.out, out.residuals.frames())?;
    let sidecar = Sidecar {
        compensate: args.compensate,
        radius: args.radius,
        shifts: out
            .shifts
            .iter()
            .enumerate()
            .map(|(frame, s)| ShiftRecord {
                frame,
                dx: s.dx,
                dy: s.dy,
            })
            .collect(),
    };
    let shifts_path = args.out.join("shifts.json");
    write_json(&shifts_path, &sidecar)?;

    let config = serde_json::json!({ "compensate": args.compensate, "radius": args.radius });
    let mut m = RunManifest::new("residual", config, None)?;
    m.inputs = vec![args.frames];
    m.outputs = vec![args.out.clone(), shifts_path];
    m.write(&args.out.join("manifest.json"), started)?;
    println!("wrote {} residual frames to {}", seq.len(), args.out.display());
    Ok(())
}
