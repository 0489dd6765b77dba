//! Gaussian and motion blur.
//!
//! Filtering runs on `f32` planes and rounds back to 8 bits once at the end.
//! Borders use half-sample symmetric mirroring (`dcba|abcd|dcba`), which
//! conserves total mass for symmetric kernels.

use crate::imaging::{to_u8, Image};

/// Single-channel floating-point raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl Plane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum()
    }
}

/// Splits an image into one plane per channel (alpha included).
pub fn to_planes(img: &Image) -> Vec<Plane> {
    let n = img.channels().count();
    let (w, h) = (img.width() as usize, img.height() as usize);
    (0..n)
        .map(|c| Plane {
            width: w,
            height: h,
            data: img.data().iter().skip(c).step_by(n).map(|&v| v as f32).collect(),
        })
        .collect()
}

/// Inverse of [`to_planes`]; samples are rounded and clamped to `[0, 255]`.
pub fn from_planes(like: &Image, planes: &[Plane]) -> Image {
    let n = like.channels().count();
    debug_assert_eq!(planes.len(), n);
    let mut out = like.clone();
    for (c, plane) in planes.iter().enumerate() {
        for (dst, &v) in out.data_mut().iter_mut().skip(c).step_by(n).zip(&plane.data) {
            *dst = to_u8(v as f64);
        }
    }
    out
}

/// Reflects `i` into `[0, n)` with edge samples repeated.
#[inline]
pub(crate) fn mirror(i: i64, n: usize) -> usize {
    let n = n as i64;
    let m = i.rem_euclid(2 * n);
    (if m < n { m } else { 2 * n - 1 - m }) as usize
}

/// Normalised 1D Gaussian taps for offsets `-r..=r`, `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil() as i64;
    let taps: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    taps.into_iter().map(|t| t / total).collect()
}

/// `mirror(i, n)` for `i` in `lo..hi`.
fn mirror_table(lo: i64, hi: i64, n: usize) -> Vec<usize> {
    (lo..hi).map(|i| mirror(i, n)).collect()
}

fn convolve_rows(src: &Plane, taps: &[f64]) -> Plane {
    let r = (taps.len() / 2) as i64;
    let idx = mirror_table(-r, src.width as i64 + r, src.width);
    let mut out = Plane::zeros(src.width, src.height);
    let mut padded = vec![0.0f64; idx.len()];
    for y in 0..src.height {
        let row = &src.data[y * src.width..(y + 1) * src.width];
        for (p, &i) in padded.iter_mut().zip(&idx) {
            *p = row[i] as f64;
        }
        for x in 0..src.width {
            let acc: f64 = taps.iter().zip(&padded[x..]).fold(0.0, |acc, (&t, &v)| acc + t * v);
            out.data[y * src.width + x] = acc as f32;
        }
    }
    out
}

fn convolve_cols(src: &Plane, taps: &[f64]) -> Plane {
    let r = (taps.len() / 2) as i64;
    let idx = mirror_table(-r, src.height as i64 + r, src.height);
    let w = src.width;
    let mut out = Plane::zeros(w, src.height);
    let mut acc = vec![0.0f64; w];
    for y in 0..src.height {
        acc.fill(0.0);
        for (k, &t) in taps.iter().enumerate() {
            let sy = idx[y + k];
            for (a, &v) in acc.iter_mut().zip(&src.data[sy * w..(sy + 1) * w]) {
                *a += t * v as f64;
            }
        }
        for (o, &a) in out.data[y * w..(y + 1) * w].iter_mut().zip(&acc) {
            *o = a as f32;
        }
    }
    out
}

pub fn gaussian_blur_plane(plane: &Plane, sigma: f64) -> Plane {
    if sigma <= 0.0 {
        return plane.clone();
    }
    let taps = gaussian_kernel(sigma);
    convolve_cols(&convolve_rows(plane, &taps), &taps)
}

/// Separable Gaussian blur of every channel. `sigma == 0` is the identity.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Image {
    if sigma <= 0.0 {
        return img.clone();
    }
    let planes: Vec<Plane> = to_planes(img)
        .iter()
        .map(|p| gaussian_blur_plane(p, sigma))
        .collect();
    from_planes(img, &planes)
}

/// Sparse 2D kernel: `(dx, dy, weight)` taps summing to one.
#[derive(Debug, Clone)]
pub struct SparseKernel {
    pub taps: Vec<(i64, i64, f64)>,
}

/// Line kernel of `length` taps along `angle_deg`, antialiased by splatting
/// each tap bilinearly onto the pixel grid.
pub fn motion_kernel(length: u32, angle_deg: f64) -> SparseKernel {
    let length = length.max(1);
    let theta = angle_deg.to_radians();
    let (dir_y, dir_x) = theta.sin_cos();
    let half = (length as f64 - 1.0) / 2.0;
    let snap = |v: f64| {
        let r = v.round();
        if (v - r).abs() < 1e-9 {
            r
        } else {
            v
        }
    };

    let mut weights: std::collections::BTreeMap<(i64, i64), f64> = Default::default();
    for t in 0..length {
        let s = t as f64 - half;
        let px = snap(s * dir_x);
        let py = snap(s * dir_y);
        let x0 = px.floor();
        let y0 = py.floor();
        let fx = px - x0;
        let fy = py - y0;
        let (x0, y0) = (x0 as i64, y0 as i64);
        for (dx, dy, w) in [
            (0, 0, (1.0 - fx) * (1.0 - fy)),
            (1, 0, fx * (1.0 - fy)),
            (0, 1, (1.0 - fx) * fy),
            (1, 1, fx * fy),
        ] {
            if w > 0.0 {
                *weights.entry((y0 + dy, x0 + dx)).or_default() += w;
            }
        }
    }
    let total: f64 = weights.values().sum();
    SparseKernel {
        taps: weights
            .into_iter()
            .map(|((dy, dx), w)| (dx, dy, w / total))
            .collect(),
    }
}

pub fn convolve_sparse(plane: &Plane, kernel: &SparseKernel) -> Plane {
    let (w, h) = (plane.width, plane.height);
    if kernel.taps.is_empty() || w == 0 || h == 0 {
        return Plane::zeros(w, h);
    }
    let rx = kernel.taps.iter().map(|t| t.0.abs()).max().unwrap_or(0);
    let ry = kernel.taps.iter().map(|t| t.1.abs()).max().unwrap_or(0);
    let xs = mirror_table(-rx, w as i64 + rx, w);
    let ys = mirror_table(-ry, h as i64 + ry, h);
    let pw = xs.len();
    let mut padded = Vec::with_capacity(pw * ys.len());
    for &sy in &ys {
        let row = &plane.data[sy * w..(sy + 1) * w];
        padded.extend(xs.iter().map(|&sx| row[sx] as f64));
    }
    let taps: Vec<(usize, f64)> = kernel
        .taps
        .iter()
        .map(|&(dx, dy, wt)| (((dy + ry) as usize) * pw + (dx + rx) as usize, wt))
        .collect();
    let mut out = Plane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let base = y * pw + x;
            let acc = taps.iter().fold(0.0f64, |acc, &(off, wt)| acc + wt * padded[base + off]);
            out.data[y * w + x] = acc as f32;
        }
    }
    out
}

pub fn motion_blur_plane(plane: &Plane, length: u32, angle_deg: f64) -> Plane {
    if length <= 1 {
        return plane.clone();
    }
    convolve_sparse(plane, &motion_kernel(length, angle_deg))
}

/// Blur along a line of `length` pixels at `angle_deg` (0 = horizontal).
pub fn motion_blur(img: &Image, length: u32, angle_deg: f64) -> Image {
    if length <= 1 {
        return img.clone();
    }
    let kernel = motion_kernel(length, angle_deg);
    let planes: Vec<Plane> = to_planes(img)
        .iter()
        .map(|p| convolve_sparse(p, &kernel))
        .collect();
    from_planes(img, &planes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Channels;

    fn textured() -> Image {
        Image::from_fn(17, 13, Channels::Rgba, |x, y| {
            [(x * 13 + y * 7) as u8, (x * y) as u8, (255 - x * 9) as u8, (y * 19) as u8]
        })
    }

    #[test]
    fn mirror_indexing() {
        assert_eq!(mirror(-1, 4), 0);
        assert_eq!(mirror(-2, 4), 1);
        assert_eq!(mirror(4, 4), 3);
        assert_eq!(mirror(5, 4), 2);
        assert_eq!(mirror(-9, 4), 0);
        assert_eq!(mirror(0, 1), 0);
        assert_eq!(mirror(7, 1), 0);
    }

    #[test]
    fn kernels_sum_to_one() {
        for sigma in [0.3, 1.0, 2.5, 7.0] {
            let k = gaussian_kernel(sigma);
            assert_eq!(k.len(), 2 * (3.0 * sigma).ceil() as usize + 1);
            assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        for (len, ang) in [(1, 0.0), (5, 0.0), (7, 33.0), (12, 90.0), (9, 135.0)] {
            let k = motion_kernel(len, ang);
            assert!((k.taps.iter().map(|t| t.2).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn horizontal_motion_kernel_is_a_box() {
        let k = motion_kernel(5, 0.0);
        assert_eq!(k.taps.len(), 5);
        for &(dx, dy, w) in &k.taps {
            assert_eq!(dy, 0);
            assert!((-2..=2).contains(&dx));
            assert!((w - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_sigma_and_unit_length_are_identity() {
        let img = textured();
        assert_eq!(gaussian_blur(&img, 0.0), img);
        assert_eq!(motion_blur(&img, 1, 47.0), img);
    }

    #[test]
    fn constant_images_are_fixed_points() {
        let img = Image::filled(23, 11, Channels::Rgb, 137);
        for sigma in [0.5, 1.7, 4.0] {
            assert_eq!(gaussian_blur(&img, sigma), img);
        }
        for (len, ang) in [(3, 0.0), (8, 30.0), (15, 100.0)] {
            assert_eq!(motion_blur(&img, len, ang), img);
        }
    }

    #[test]
    fn gaussian_preserves_mass_of_a_point() {
        let mut p = Plane::zeros(41, 41);
        p.data[20 * 41 + 20] = 255.0;
        let out = gaussian_blur_plane(&p, 2.0);
        let rel = (out.sum() - 255.0).abs() / 255.0;
        assert!(rel < 0.005, "relative mass change {rel}");
        // Near a corner the mirror folds the tails back in.
        let mut p = Plane::zeros(9, 9);
        p.data[0] = 255.0;
        let out = gaussian_blur_plane(&p, 2.0);
        assert!((out.sum() - 255.0).abs() / 255.0 < 0.005);
    }

    #[test]
    fn gaussian_preserves_mass_of_a_bright_block_in_8_bit() {
        let img = Image::from_fn(40, 40, Channels::Gray, |x, y| {
            let inside = (15..25).contains(&x) && (15..25).contains(&y);
            [if inside { 255 } else { 0 }, 0, 0, 0]
        });
        let before: u64 = img.data().iter().map(|&v| v as u64).sum();
        let after: u64 = gaussian_blur(&img, 2.0).data().iter().map(|&v| v as u64).sum();
        let rel = (after as f64 - before as f64).abs() / before as f64;
        assert!(rel < 0.005, "relative mass change {rel}");
    }

    #[test]
    fn horizontal_motion_blur_keeps_row_sums() {
        let img = Image::from_fn(21, 6, Channels::Gray, |x, _| [if x == 10 { 255 } else { 0 }, 0, 0, 0]);
        let out = motion_blur(&img, 5, 0.0);
        for y in 0..6 {
            let s: u32 = (0..21).map(|x| out.pixel(x, y)[0] as u32).sum();
            assert!((s as f64 - 255.0).abs() / 255.0 < 0.005, "row {y} sum {s}");
        }
        let mut p = Plane::zeros(21, 6);
        for y in 0..6 {
            p.data[y * 21 + 10] = 255.0;
        }
        let out = motion_blur_plane(&p, 7, 0.0);
        for y in 0..6 {
            let s: f64 = (0..21).map(|x| out.at(x, y) as f64).sum();
            assert!((s - 255.0).abs() / 255.0 < 0.005);
        }
    }
}
