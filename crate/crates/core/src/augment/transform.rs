use super::{ForegroundAsset, PlacementParams};
use crate::error::{Error, Result};
use crate::imaging::{floor_i64, luma, to_u8, BoundingBox, Channels, Image};

/// Rotates `asset` about its centre and scales it uniformly so that its
/// width becomes `scale_ratio * bg_width`.
///
/// Colour and alpha are resampled identically with bilinear interpolation;
/// samples falling outside the source are fully transparent black.
pub fn transform_foreground(asset: &ForegroundAsset, p: &PlacementParams, bg_width: u32) -> ForegroundAsset {
    let src = &asset.raster;
    let (w, h) = src.dims();
    let (ow, oh) = p.transformed_dims((w, h), bg_width);
    let k = p.scale_factor(w, bg_width);
    let (sin, cos) = p.rotation_deg.to_radians().sin_cos();

    let (hw, hh) = (w as f64 / 2.0, h as f64 / 2.0);
    let (ohw, ohh) = (ow as f64 / 2.0, oh as f64 / 2.0);
    let out = Image::from_fn(ow, oh, Channels::Rgba, |u, v| {
        let qx = (u as f64 + 0.5 - ohw) / k;
        let qy = (v as f64 + 0.5 - ohh) / k;
        // Inverse rotation back into the source frame.
        let sx = cos * qx + sin * qy + hw - 0.5;
        let sy = -sin * qx + cos * qy + hh - 0.5;
        sample_bilinear(src, sx, sy)
    });
    ForegroundAsset {
        raster: out,
        name: asset.name.clone(),
    }
}

/// Bilinear RGBA sample at index-space position `(x, y)` with transparent
/// zero padding outside the raster.
fn sample_bilinear(img: &Image, x: f64, y: f64) -> [u8; 4] {
    let (x0, y0) = (floor_i64(x), floor_i64(y));
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let (w, h) = (img.width() as i64, img.height() as i64);
    let mut acc = [0.0f64; 4];
    for (dx, dy, wt) in [
        (0, 0, (1.0 - fx) * (1.0 - fy)),
        (1, 0, fx * (1.0 - fy)),
        (0, 1, (1.0 - fx) * fy),
        (1, 1, fx * fy),
    ] {
        let (sx, sy) = (x0 + dx, y0 + dy);
        if wt == 0.0 || sx < 0 || sy < 0 || sx >= w || sy >= h {
            continue;
        }
        let px = img.pixel(sx as u32, sy as u32);
        for c in 0..4 {
            acc[c] += wt * px[c] as f64;
        }
    }
    acc.map(to_u8)
}

/// Smallest axis-aligned box covering every pixel with non-zero alpha.
pub fn tight_alpha_box(asset: &ForegroundAsset) -> Result<BoundingBox> {
    let img = &asset.raster;
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0u32, 0u32);
    let mut any = false;
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.pixel(x, y)[3] > 0 {
                any = true;
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    if !any {
        return Err(Error::EmptyAsset);
    }
    BoundingBox::new(x0 as f64, y0 as f64, (x1 - x0 + 1) as f64, (y1 - y0 + 1) as f64)
}

/// Replaces the colour of every pixel by its luma, keeping alpha.
pub fn grayscale_asset(asset: &ForegroundAsset) -> ForegroundAsset {
    let mut raster = asset.raster.clone();
    for px in raster.data_mut().chunks_exact_mut(4) {
        let y = luma(px[0], px[1], px[2]);
        px[0] = y;
        px[1] = y;
        px[2] = y;
    }
    ForegroundAsset {
        raster,
        name: asset.name.clone(),
    }
}
