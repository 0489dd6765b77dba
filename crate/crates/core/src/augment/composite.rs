use super::{tight_alpha_box, ForegroundAsset, PlacementParams};
use crate::error::{Error, Result};
use crate::imaging::{clamp_box, BoundingBox, Channels, Image};

/// Alpha-over blend of an RGBA `fg` onto an RGB `bg` with `fg`'s top-left
/// corner at `offset`. Background pixels under zero alpha are untouched.
pub fn alpha_over(bg: &Image, fg: &Image, offset: (i64, i64)) -> Image {
    debug_assert_eq!(fg.channels(), Channels::Rgba);
    let mut out = bg.clone();
    let n = bg.channels().count();
    let (bw, bh) = (bg.width() as i64, bg.height() as i64);
    for v in 0..fg.height() {
        let y = offset.1 + v as i64;
        if y < 0 || y >= bh {
            continue;
        }
        for u in 0..fg.width() {
            let x = offset.0 + u as i64;
            if x < 0 || x >= bw {
                continue;
            }
            let src = fg.pixel(u, v);
            let a = src[3] as u32;
            if a == 0 {
                continue;
            }
            let dst = out.pixel_mut(x as u32, y as u32);
            for c in 0..n.min(3) {
                dst[c] = ((a * src[c] as u32 + (255 - a) * dst[c] as u32 + 127) / 255) as u8;
            }
        }
    }
    out
}

/// Pixel result of pasting the (already transformed) `asset` at `p.center`.
pub fn composite_onto(bg: &Image, asset: &ForegroundAsset, p: &PlacementParams) -> Image {
    let offset = p.offset(asset.raster.dims());
    alpha_over(bg, &asset.raster, offset)
}

/// Box, in background coordinates, of the visible part of `asset` once
/// placed according to `p`.
pub fn placed_box(bg: &Image, asset: &ForegroundAsset, p: &PlacementParams) -> Result<BoundingBox> {
    let (ox, oy) = p.offset(asset.raster.dims());
    let local = tight_alpha_box(asset)?;
    clamp_box(&local.translate(ox as f64, oy as f64), bg.width(), bg.height())
}

/// Pastes `asset` onto `bg` and derives the matching annotation box.
pub fn composite(bg: &Image, asset: &ForegroundAsset, p: &PlacementParams) -> Result<(Image, BoundingBox)> {
    if bg.channels() != Channels::Rgb {
        return Err(Error::InvalidImage(format!(
            "background must be RGB, got {:?}",
            bg.channels()
        )));
    }
    let bbox = placed_box(bg, asset, p)?;
    Ok((composite_onto(bg, asset, p), bbox))
}
