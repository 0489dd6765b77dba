use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;
use skywatch_core::thermal::{
    cycle_consistency_loss, texture_gan_loss, total_loss, AffineMap, ConstantDiscriminator, IdentityFeatures,
    LossWeights, Tensor,
};

use crate::exit;

#[derive(clap::Args)]
#[command(group(clap::ArgGroup::new("loss").required(true).args(["cycle", "texture", "total"])))]
pub struct Args {
    /// Source-domain batch: a tensor `{"shape":[..],"data":[..]}` or a list of them.
    #[arg(long)]
    x: PathBuf,
    /// Target-domain batch, same format.
    #[arg(long)]
    y: PathBuf,
    /// Cycle-consistency loss.
    #[arg(long)]
    cycle: bool,
    /// Texture GAN loss of translating x into the domain of y.
    #[arg(long)]
    texture: bool,
    /// Weighted total of both texture losses and the cycle loss.
    #[arg(long)]
    total: bool,
    /// Use identity generators, ignoring the affine generator flags.
    #[arg(long)]
    identity: bool,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    ga_scale: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    ga_shift: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    gb_scale: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gb_shift: f64,
    /// Constant output of both discriminators.
    #[arg(long, default_value_t = 0.5)]
    disc_const: f64,
    /// Weight of the cycle term in the total loss.
    #[arg(long, default_value_t = 10.0)]
    lambda: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Batch {
    One(Tensor),
    Many(Vec<Tensor>),
}

fn read_batch(path: &Path) -> anyhow::Result<Vec<Tensor>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let batch: Batch = serde_json::from_str(&text)
        .map_err(|e| exit::data(format!("{}: not a tensor or list of tensors ({e})", path.display())))?;
    Ok(match batch {
        Batch::One(t) => vec![t],
        Batch::Many(ts) => ts,
    })
}

pub fn run(args: Args) -> anyhow::Result<()> {
    let xs = read_batch(&args.x)?;
    let ys = read_batch(&args.y)?;
    let (ga, gb) = if args.identity {
        (AffineMap::IDENTITY, AffineMap::IDENTITY)
    } else {
        (
            AffineMap {
                scale: args.ga_scale,
                shift: args.ga_shift,
            },
            AffineMap {
                scale: args.gb_scale,
                shift: args.gb_shift,
            },
        )
    };
    let d = ConstantDiscriminator(args.disc_const);
    let phi = IdentityFeatures;

    let value = if args.cycle {
        cycle_consistency_loss(&xs, &ys, &ga, &gb)?
    } else if args.texture {
        texture_gan_loss(&xs, &ys, &ga, &d, &phi)?
    } else {
        let w = LossWeights::new(args.lambda)?;
        total_loss(&xs, &ys, &ga, &gb, &d, &d, &phi, w)?
    };
    println!("{value:?}");
    Ok(())
}
