//! Model-based data augmentation: paste transformed foreground drones onto
//! backgrounds, perturb illumination and image quality, and emit the image
//! together with an automatically derived bounding box.
//!
//! Stage order is fixed: geometry, foreground quality (grayscale and
//! blurs), compositing, then shadows on the whole frame.

mod blur;
mod composite;
mod noise;
mod placement;
mod shadow;
mod transform;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use blur::{
    gaussian_blur, gaussian_blur_plane, gaussian_kernel, motion_blur, motion_blur_plane, motion_kernel, Plane,
    SparseKernel,
};
pub use composite::{alpha_over, composite, composite_onto, placed_box};
pub use noise::{perlin2, Perlin};
pub use placement::{
    in_frame_fraction, sample_placement, PlacementParams, MAX_PLACEMENT_DRAWS, MIN_IN_FRAME_FRACTION,
};
pub use shadow::{apply_shadow, shadow_map_lines, shadow_map_perlin};
pub use transform::{grayscale_asset, tight_alpha_box, transform_foreground};

use crate::error::{Error, Result};
use crate::imaging::{Annotation, Channels, Image};

/// Placement attempts in [`generate_sample`] before an empty-box error is
/// returned. A placement can keep half of the canvas in frame while the
/// visible pixels of a sparse asset fall outside.
const MAX_BOX_RETRIES: usize = 16;

/// RGBA foreground (a pre-rendered drone) with at least one visible pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct ForegroundAsset {
    pub(crate) raster: Image,
    pub(crate) name: String,
}

impl ForegroundAsset {
    pub fn new(raster: Image, name: impl Into<String>) -> Result<Self> {
        if raster.channels() != Channels::Rgba {
            return Err(Error::InvalidImage(format!(
                "foreground assets must be RGBA, got {:?}",
                raster.channels()
            )));
        }
        if !raster.data().chunks_exact(4).any(|px| px[3] > 0) {
            return Err(Error::EmptyAsset);
        }
        Ok(Self {
            raster,
            name: name.into(),
        })
    }

    pub fn raster(&self) -> &Image {
        &self.raster
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// Augmentation knobs. Every field has a default, so `{}` is a valid JSON
/// config. Ranges are `[lo, hi]`; scale and rotation are sampled from the
/// open interval, the others from the closed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub seed: u64,
    /// Foreground width relative to background width.
    pub scale_range: [f64; 2],
    pub rotation_range: [f64; 2],
    pub p_shadow_lines: f64,
    pub p_shadow_perlin: f64,
    pub p_grayscale: f64,
    pub p_gaussian_blur: f64,
    pub p_motion_blur: f64,
    pub gaussian_sigma_range: [f64; 2],
    pub motion_blur_length_range: [u32; 2],
    pub motion_blur_angle_range: [f64; 2],
    pub shadow_strength_range: [f64; 2],
    pub shadow_line_count_range: [u32; 2],
    /// Width of the soft edge of line shadows, in pixels.
    pub shadow_softness: f64,
    /// Approximate feature size of Perlin shadows, in pixels.
    pub perlin_cell: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            scale_range: [0.1, 0.5],
            rotation_range: [-30.0, 30.0],
            p_shadow_lines: 0.25,
            p_shadow_perlin: 0.25,
            p_grayscale: 0.2,
            p_gaussian_blur: 0.3,
            p_motion_blur: 0.3,
            gaussian_sigma_range: [0.5, 2.0],
            motion_blur_length_range: [3, 9],
            motion_blur_angle_range: [0.0, 180.0],
            shadow_strength_range: [0.3, 0.7],
            shadow_line_count_range: [1, 3],
            shadow_softness: 6.0,
            perlin_cell: 48.0,
        }
    }
}

impl AugmentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Disables every perturbation, leaving pure geometric augmentation.
    pub fn geometry_only(mut self) -> Self {
        self.p_shadow_lines = 0.0;
        self.p_shadow_perlin = 0.0;
        self.p_grayscale = 0.0;
        self.p_gaussian_blur = 0.0;
        self.p_motion_blur = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let [lo, hi] = self.scale_range;
        if !(lo > 0.0 && lo < hi && hi <= 1.0) {
            return bad(format!("scale_range {lo}..{hi} must satisfy 0 < lo < hi <= 1"));
        }
        let [lo, hi] = self.rotation_range;
        if !(lo >= -180.0 && lo < hi && hi <= 180.0) {
            return bad(format!("rotation_range {lo}..{hi} must satisfy -180 <= lo < hi <= 180"));
        }
        for (name, p) in [
            ("p_shadow_lines", self.p_shadow_lines),
            ("p_shadow_perlin", self.p_shadow_perlin),
            ("p_grayscale", self.p_grayscale),
            ("p_gaussian_blur", self.p_gaussian_blur),
            ("p_motion_blur", self.p_motion_blur),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        let [lo, hi] = self.gaussian_sigma_range;
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("gaussian_sigma_range {lo}..{hi} invalid"));
        }
        let [lo, hi] = self.motion_blur_length_range;
        if !(lo >= 1 && lo <= hi) {
            return bad(format!("motion_blur_length_range {lo}..{hi} invalid"));
        }
        let [lo, hi] = self.motion_blur_angle_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return bad(format!("motion_blur_angle_range {lo}..{hi} invalid"));
        }
        let [lo, hi] = self.shadow_strength_range;
        if !(lo >= 0.0 && lo <= hi && hi <= 1.0) {
            return bad(format!("shadow_strength_range {lo}..{hi} must lie in [0, 1]"));
        }
        let [lo, hi] = self.shadow_line_count_range;
        if !(lo >= 1 && lo <= hi) {
            return bad(format!("shadow_line_count_range {lo}..{hi} invalid"));
        }
        if !(self.shadow_softness >= 0.0 && self.shadow_softness.is_finite()) {
            return bad("shadow_softness must be non-negative".into());
        }
        if !(self.perlin_cell >= 1.0 && self.perlin_cell.is_finite()) {
            return bad("perlin_cell must be at least 1".into());
        }
        Ok(())
    }
}

/// Sub-seed for sample `index` of a batch seeded with `seed`.
pub fn sample_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}

fn closed<R: Rng + ?Sized>(rng: &mut R, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Produces one augmented image and its annotation.
///
/// The annotation carries frame 0, label `"drone"` and no score; callers
/// numbering a batch overwrite the frame index.
pub fn generate_sample<R: Rng + ?Sized>(
    rng: &mut R,
    bg: &Image,
    assets: &[ForegroundAsset],
    cfg: &AugmentConfig,
) -> Result<(Image, Annotation)> {
    let s = generate_detailed(rng, bg, assets, cfg)?;
    Ok((s.image, s.annotation))
}

/// One augmented sample together with the choices that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: Image,
    pub annotation: Annotation,
    pub asset_index: usize,
    pub placement: PlacementParams,
}

/// [`generate_sample`], also reporting the asset and placement used.
pub fn generate_detailed<R: Rng + ?Sized>(
    rng: &mut R,
    bg: &Image,
    assets: &[ForegroundAsset],
    cfg: &AugmentConfig,
) -> Result<Sample> {
    if assets.is_empty() {
        return Err(Error::InvalidConfig("no foreground assets".into()));
    }
    if bg.channels() != Channels::Rgb {
        return Err(Error::InvalidImage(format!(
            "background must be RGB, got {:?}",
            bg.channels()
        )));
    }
    let asset_index = rng.random_range(0..assets.len());
    let asset = &assets[asset_index];

    let mut attempt = 0;
    let (placement, mut fg) = loop {
        let p = sample_placement(rng, bg.dims(), asset.raster.dims(), cfg)?;
        let fg = transform_foreground(asset, &p, bg.width());
        match placed_box(bg, &fg, &p) {
            Ok(_) => break (p, fg),
            Err(Error::EmptyBox | Error::EmptyAsset) if attempt + 1 < MAX_BOX_RETRIES => attempt += 1,
            Err(e) => return Err(e),
        }
    };

    if rng.random_bool(cfg.p_grayscale) {
        fg = grayscale_asset(&fg);
    }
    if rng.random_bool(cfg.p_gaussian_blur) {
        let sigma = closed(rng, cfg.gaussian_sigma_range);
        fg.raster = gaussian_blur(&fg.raster, sigma);
    }
    if rng.random_bool(cfg.p_motion_blur) {
        let [lo, hi] = cfg.motion_blur_length_range;
        let length = rng.random_range(lo..=hi);
        let angle = closed(rng, cfg.motion_blur_angle_range);
        fg.raster = motion_blur(&fg.raster, length, angle);
    }

    let (mut img, bbox) = composite(bg, &fg, &placement)?;

    if rng.random_bool(cfg.p_shadow_lines) {
        let [lo, hi] = cfg.shadow_line_count_range;
        let n = rng.random_range(lo..=hi);
        let map = shadow_map_lines(rng, img.dims(), n, cfg.shadow_softness);
        let strength = closed(rng, cfg.shadow_strength_range);
        img = apply_shadow(&img, &map, strength)?;
    }
    if rng.random_bool(cfg.p_shadow_perlin) {
        let map = shadow_map_perlin(rng, img.dims(), cfg.perlin_cell);
        let strength = closed(rng, cfg.shadow_strength_range);
        img = apply_shadow(&img, &map, strength)?;
    }

    Ok(Sample {
        image: img,
        annotation: Annotation::ground_truth(0, bbox),
        asset_index,
        placement,
    })
}
