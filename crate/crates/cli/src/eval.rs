use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use skywatch_core::eval::{auc, default_thresholds, pr_auc, precision_recall, track_success};
use skywatch_core::imaging::read_annotations;

use crate::manifest::{sidecar_path, RunManifest};

#[derive(clap::Args)]
pub struct TrackArgs {
    /// Predicted boxes (JSONL).
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth boxes (JSONL).
    #[arg(long)]
    gt: PathBuf,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
pub struct DetectArgs {
    /// Scored detections (JSONL).
    #[arg(long)]
    dets: PathBuf,
    /// Ground-truth boxes (JSONL).
    #[arg(long)]
    gt: PathBuf,
    /// IoU a detection must exceed to count as a hit.
    #[arg(long, default_value_t = 0.5)]
    iou: f64,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

fn read(path: &PathBuf) -> anyhow::Result<Vec<skywatch_core::Annotation>> {
    read_annotations(path).with_context(|| format!("reading {}", path.display()))
}

pub fn run_track(args: TrackArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let pred = read(&args.pred)?;
    let gt = read(&args.gt)?;
    let curve = track_success(&pred, &gt, &default_thresholds())?;
    let area = auc(&curve);

    let mut csv = String::from("threshold,success_rate\n");
    for (t, s) in curve.thresholds.iter().zip(&curve.success_rate) {
        writeln!(csv, "{t:.2},{s:.6}")?;
    }
    writeln!(csv, "auc,{area:.6}")?;
    std::fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out.display()))?;

    let mut m = RunManifest::new("eval-track", serde_json::json!({ "grid_step": 0.01 }), None)?;
    m.inputs = vec![args.pred, args.gt];
    m.outputs = vec![args.out.clone()];
    m.write(&sidecar_path(&args.out), started)?;
    println!("auc {area:.6}");
    Ok(())
}

pub fn run_detect(args: DetectArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    if !(0.0..1.0).contains(&args.iou) {
        return Err(crate::exit::config(format!("--iou {} must be in [0, 1)", args.iou)));
    }
    let dets = read(&args.dets)?;
    let gt = read(&args.gt)?;
    let curve = precision_recall(&dets, &gt, args.iou)?;
    let area = pr_auc(&curve);

    let mut csv = String::from("recall,precision\n");
    for p in &curve.points {
        writeln!(csv, "{:.6},{:.6}", p.recall, p.precision)?;
    }
    writeln!(csv, "auc,{area:.6}")?;
    std::fs::write(&args.out, csv).with_context(|| format!("writing {}", args.out.display()))?;

    let mut m = RunManifest::new("eval-detect", serde_json::json!({ "iou": args.iou }), None)?;
    m.inputs = vec![args.dets, args.gt];
    m.outputs = vec![args.out.clone()];
    m.write(&sidecar_path(&args.out), started)?;
    println!("auc {area:.6}");
    Ok(())
}
