use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use skywatch_core::fusion::{
    run_detector_only, run_monitor, run_tracker_only, MonitorSettings, SimulatedDetector, SimulatedTracker,
};
use skywatch_core::imaging::{load_frame_dir, read_annotations, write_annotations};
use skywatch_core::residual::FrameSequence;
use skywatch_core::Annotation;

use crate::exit;
use crate::manifest::{sidecar_path, RunManifest};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Integrated,
    DetectOnly,
    TrackOnly,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Integrated => "integrated",
            Mode::DetectOnly => "detect-only",
            Mode::TrackOnly => "track-only",
        }
    }
}

/// `START:END` frame window, end exclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LossEvent(pub u64, pub u64);

impl FromStr for LossEvent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or("expected START:END")?;
        let start: u64 = a.trim().parse().map_err(|e| format!("bad start: {e}"))?;
        let end: u64 = b.trim().parse().map_err(|e| format!("bad end: {e}"))?;
        if end <= start {
            return Err("END must be greater than START".into());
        }
        Ok(LossEvent(start, end))
    }
}

/// Behaviour of the simulated detector and tracker.
#[derive(Clone, Debug, PartialEq, clap::Args, Serialize)]
pub struct SimArgs {
    /// Probability that the detector misses the drone on a frame.
    #[arg(long, default_value_t = 0.3)]
    pub miss_rate: f64,
    /// Mean number of false positives per frame.
    #[arg(long, default_value_t = 0.2)]
    pub fp_rate: f64,
    /// Detector box noise (pixels, standard deviation).
    #[arg(long, default_value_t = 2.0)]
    pub loc_noise: f64,
    /// Tracker random-walk drift (pixels per frame per axis).
    #[arg(long, default_value_t = 2.0)]
    pub drift: f64,
    /// Frames where the tracker loses the target, as START:END.
    #[arg(long = "loss-event")]
    pub loss_events: Vec<LossEvent>,
}

#[derive(clap::Args)]
pub struct Args {
    /// Directory of numbered frames.
    #[arg(long)]
    frames: PathBuf,
    /// Ground truth JSONL driving the simulated models.
    #[arg(long)]
    gt: PathBuf,
    /// Calibration and monitor settings (JSON); defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output JSONL; a `<stem>.manifest.json` is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Which models feed the output.
    #[arg(long, value_enum, default_value_t = Mode::Integrated)]
    mode: Mode,
    /// Seed of the simulated detector and tracker.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    sim: SimArgs,
}

pub fn run_mode(
    seq: &FrameSequence,
    gt: &[Annotation],
    settings: &MonitorSettings,
    mode: Mode,
    sim: &SimArgs,
    seed: u64,
) -> anyhow::Result<Vec<Annotation>> {
    let params = settings.calibration();
    let cfg = settings.monitor();
    let events: Vec<(u64, u64)> = sim.loss_events.iter().map(|e| (e.0, e.1)).collect();
    let detector = || SimulatedDetector::new(gt, sim.miss_rate, sim.fp_rate, sim.loc_noise, seed);
    let tracker = || SimulatedTracker::new(gt, sim.drift, events.clone(), seed);
    let out = match mode {
        Mode::Integrated => run_monitor(seq, &mut detector()?, &mut tracker()?, &params, &cfg)?,
        Mode::DetectOnly => run_detector_only(seq, &mut detector()?, &params, cfg.reject_epsilon)?,
        Mode::TrackOnly => {
            let first = gt
                .iter()
                .min_by_key(|a| a.frame)
                .ok_or_else(|| exit::data("track-only mode needs at least one ground-truth box"))?;
            run_tracker_only(seq, &mut tracker()?, first, &params)?
        }
    };
    Ok(out)
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let started = Instant::now();
    let settings = match &args.config {
        Some(p) => MonitorSettings::from_json_file(p)?,
        None => MonitorSettings::default(),
    };
    let frames = load_frame_dir(&args.frames)?;
    if frames.is_empty() {
        return Err(exit::data(format!("no frames found in {}", args.frames.display())));
    }
    let seq = FrameSequence::new(frames, 30.0)?;
    let gt = read_annotations(&args.gt).with_context(|| format!("reading {}", args.gt.display()))?;

    let out = run_mode(&seq, &gt, &settings, args.mode, &args.sim, args.seed)?;
    write_annotations(&args.out, &out)?;

    let config = serde_json::json!({
        "mode": args.mode,
        "settings": settings,
        "simulation": args.sim,
    });
    let mut m = RunManifest::new("monitor", config, Some(args.seed))?;
    m.inputs = [Some(args.frames), Some(args.gt), args.config].into_iter().flatten().collect();
    m.outputs = vec![args.out.clone()];
    m.write(&sidecar_path(&args.out), started)?;
    println!("{} boxes over {} frames -> {}", out.len(), seq.len(), args.out.display());
    Ok(())
}
