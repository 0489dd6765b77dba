use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use skywatch_core::eval::{auc, default_thresholds, track_success};
use skywatch_core::fusion::MonitorSettings;
use skywatch_core::imaging::{save_frame_dir, save_image, write_annotations};
use skywatch_core::scenario::{drone_assets, scenario, sky_background, ScenarioConfig};

use crate::manifest::{create_dir, write_json, RunManifest};
use crate::monitor::{run_mode, LossEvent, Mode, SimArgs};

#[derive(clap::Args)]
pub struct Args {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Scenario and model seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sequence length.
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u32).range(1..))]
    frames: u32,
}

#[derive(Serialize)]
struct ScenarioRecord {
    seed: u64,
    config: ScenarioConfig,
    loss_event: (u64, u64),
}

#[derive(Serialize)]
struct ModeScore {
    mode: &'static str,
    boxes: usize,
    auc: f64,
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let started = Instant::now();
    let cfg = ScenarioConfig {
        frames: args.frames,
        ..Default::default()
    };
    let s = scenario(args.seed, &cfg)?;
    let out = &args.out;
    create_dir(out)?;

    save_frame_dir(out.join("frames"), s.frames.frames())?;
    let gt = &s.trajectory.ground_truth;
    write_annotations(out.join("gt.jsonl"), gt)?;
    write_json(
        &out.join("scenario.json"),
        &ScenarioRecord {
            seed: args.seed,
            config: cfg.clone(),
            loss_event: s.trajectory.loss_event,
        },
    )?;

    let assets = out.join("assets");
    create_dir(&assets)?;
    for (i, a) in drone_assets(4, args.seed).iter().enumerate() {
        save_image(a.raster(), assets.join(format!("drone_{i}.png")))?;
    }
    let backgrounds = out.join("backgrounds");
    create_dir(&backgrounds)?;
    for i in 0..3u64 {
        save_image(
            &sky_background(cfg.width, cfg.height, args.seed.wrapping_add(100 + i)),
            backgrounds.join(format!("sky_{i}.png")),
        )?;
    }

    let sim = SimArgs {
        miss_rate: 0.3,
        fp_rate: 0.2,
        loc_noise: 2.0,
        drift: 2.0,
        loss_events: vec![LossEvent(s.trajectory.loss_event.0, s.trajectory.loss_event.1)],
    };
    let settings = MonitorSettings::default();
    let mut scores = Vec::new();
    for mode in [Mode::Integrated, Mode::DetectOnly, Mode::TrackOnly] {
        let pred = run_mode(&s.frames, gt, &settings, mode, &sim, args.seed)?;
        write_annotations(out.join(format!("pred_{}.jsonl", mode.name())), &pred)?;
        let area = auc(&track_success(&pred, gt, &default_thresholds())?);
        println!("{:<12} auc {area:.4}", mode.name());
        scores.push(ModeScore {
            mode: mode.name(),
            boxes: pred.len(),
            auc: area,
        });
    }
    write_json(&out.join("summary.json"), &scores)?;

    let config = serde_json::json!({ "scenario": cfg, "simulation": sim, "settings": settings });
    let mut m = RunManifest::new("demo", config, Some(args.seed))?;
    m.outputs = vec![out.clone()];
    m.write(&out.join("manifest.json"), started)?;
    Ok(())
}
