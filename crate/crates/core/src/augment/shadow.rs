//! Multiplicative shadow maps. A map is a gray image where 255 means fully
//! lit and 0 fully shadowed.

use rand::Rng;

use super::Perlin;
use crate::error::{Error, Result};
use crate::imaging::{to_u8, Channels, Image};

/// Darkening applied by one line's shadowed half-plane, drawn per line.
const LINE_DARKNESS: (f64, f64) = (0.3, 0.6);

/// Shadow map made of `n_lines` random straight edges.
///
/// Each line cuts the frame in two; the shadowed side is multiplied by
/// `1 - darkness`. The transition ramps linearly over `softness` pixels.
pub fn shadow_map_lines<R: Rng + ?Sized>(rng: &mut R, dims: (u32, u32), n_lines: u32, softness: f64) -> Image {
    let (w, h) = dims;
    let lines: Vec<_> = (0..n_lines)
        .map(|_| {
            let px = rng.random_range(0.0..w as f64);
            let py = rng.random_range(0.0..h as f64);
            let phi = rng.random_range(0.0..std::f64::consts::PI);
            let flip = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let darkness = rng.random_range(LINE_DARKNESS.0..LINE_DARKNESS.1);
            let (s, c) = phi.sin_cos();
            (px, py, -s * flip, c * flip, darkness)
        })
        .collect();

    Image::from_fn(w, h, Channels::Gray, |x, y| {
        let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
        let mut light = 1.0;
        for &(px, py, nx, ny, darkness) in &lines {
            let d = (fx - px) * nx + (fy - py) * ny;
            let cover = if softness > 0.0 {
                (0.5 + d / softness).clamp(0.0, 1.0)
            } else if d > 0.0 {
                1.0
            } else {
                0.0
            };
            light *= 1.0 - darkness * cover;
        }
        [to_u8(255.0 * light), 0, 0, 0]
    })
}

/// Irregular shadow map from fractal Perlin noise with features roughly
/// `cell` pixels across.
pub fn shadow_map_perlin<R: Rng + ?Sized>(rng: &mut R, dims: (u32, u32), cell: f64) -> Image {
    let noise = Perlin::new(rng.random());
    let ox = rng.random_range(0.0..256.0);
    let oy = rng.random_range(0.0..256.0);
    let cell = cell.max(1.0);
    let xs: Vec<f64> = (0..dims.0).map(|x| ox + x as f64 / cell).collect();
    let ys: Vec<f64> = (0..dims.1).map(|y| oy + y as f64 / cell).collect();
    let data = noise.fbm_grid(&xs, &ys, 3).into_iter().map(|n| to_u8(255.0 * (0.5 + 0.5 * n))).collect();
    Image::new(dims.0, dims.1, Channels::Gray, data).expect("one sample per pixel")
}

/// `out = img * (1 - strength * (1 - map / 255))` on every colour channel.
pub fn apply_shadow(img: &Image, map: &Image, strength: f64) -> Result<Image> {
    if map.dims() != img.dims() || map.channels() != Channels::Gray {
        return Err(Error::DimensionMismatch(format!(
            "shadow map {}x{} {:?} vs image {}x{}",
            map.width(),
            map.height(),
            map.channels(),
            img.width(),
            img.height()
        )));
    }
    let n = img.channels().count();
    let colors = img.channels().color_count();
    let mut out = img.clone();
    for (px, &m) in out.data_mut().chunks_exact_mut(n).zip(map.data()) {
        let factor = 1.0 - strength * (1.0 - m as f64 / 255.0);
        for v in &mut px[..colors] {
            *v = to_u8(*v as f64 * factor);
        }
    }
    Ok(out)
}
