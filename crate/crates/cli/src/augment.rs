use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use skywatch_core::augment::{generate_sample, sample_seed, AugmentConfig, ForegroundAsset};
use skywatch_core::imaging::{list_frame_files, load_image, save_image, write_annotations};
use skywatch_core::{Channels, Image};

use crate::exit;
use crate::manifest::{create_dir, RunManifest};

#[derive(clap::Args)]
pub struct Args {
    /// Directory of RGBA foreground PNGs.
    #[arg(long)]
    fg: PathBuf,
    /// Directory of background images.
    #[arg(long)]
    bg: PathBuf,
    /// JSON augmentation config; every field is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of samples to generate.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

pub fn sample_file_name(i: u64) -> String {
    format!("sample_{i:06}.png")
}

/// Drops alpha or replicates gray so any background becomes RGB.
pub fn to_rgb(img: Image) -> Image {
    match img.channels() {
        Channels::Rgb => img,
        Channels::Gray => Image::from_fn(img.width(), img.height(), Channels::Rgb, |x, y| {
            let v = img.pixel(x, y)[0];
            [v, v, v, 0]
        }),
        Channels::Rgba => Image::from_fn(img.width(), img.height(), Channels::Rgb, |x, y| {
            let p = img.pixel(x, y);
            [p[0], p[1], p[2], 0]
        }),
    }
}

fn load_assets(dir: &Path) -> anyhow::Result<Vec<ForegroundAsset>> {
    if !dir.is_dir() {
        return Err(exit::config(format!("foreground directory {} does not exist", dir.display())));
    }
    let files = list_frame_files(dir)?;
    if files.is_empty() {
        return Err(exit::config(format!(
            "no foreground assets (RGBA .png files) found in {}",
            dir.display()
        )));
    }
    files
        .iter()
        .map(|path| {
            let img = load_image(path)?;
            let name = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            ForegroundAsset::new(img, name).with_context(|| format!("foreground asset {}", path.display()))
        })
        .collect()
}

fn load_backgrounds(dir: &Path) -> anyhow::Result<Vec<Image>> {
    if !dir.is_dir() {
        return Err(exit::config(format!("background directory {} does not exist", dir.display())));
    }
    let files = list_frame_files(dir)?;
    if files.is_empty() {
        return Err(exit::config(format!("no background images found in {}", dir.display())));
    }
    files.iter().map(|p| Ok(to_rgb(load_image(p)?))).collect()
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let started = Instant::now();
    let mut cfg = match &args.config {
        Some(path) => AugmentConfig::from_json_file(path)?,
        None => AugmentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let assets = load_assets(&args.fg)?;
    let backgrounds = load_backgrounds(&args.bg)?;
    create_dir(&args.out)?;

    let samples: Vec<_> = (0..args.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(cfg.seed, i));
            let bg = &backgrounds[rng.random_range(0..backgrounds.len())];
            let (img, mut ann) = generate_sample(&mut rng, bg, &assets, &cfg).with_context(|| format!("sample {i}"))?;
            ann.frame = i;
            save_image(&img, args.out.join(sample_file_name(i)))?;
            Ok(ann)
        })
        .collect::<anyhow::Result<_>>()?;

    let ann_path = args.out.join("annotations.jsonl");
    write_annotations(&ann_path, &samples)?;

    let mut m = RunManifest::new("augment", &cfg, Some(cfg.seed))?;
    m.inputs = [Some(args.fg), Some(args.bg), args.config].into_iter().flatten().collect();
    m.outputs = vec![args.out.clone(), ann_path];
    m.write(&args.out.join("manifest.json"), started)?;
    println!("wrote {} samples to {}", args.count, args.out.display());
    Ok(())
}
