//! Raster data model shared by every other module.
//!
//! Coordinates follow the usual image convention: origin at the top-left
//! corner, `x` grows rightward and `y` downward. Pixel `(row i, col j)`
//! covers the continuous square `[j, j+1) x [i, i+1)`.

mod annotations;
mod frames;
mod io;

pub use annotations::{read_annotations, write_annotations, Annotation};
pub use frames::{frame_file_name, list_frame_files, load_frame_dir, save_frame_dir};
pub use io::{decode_image, encode_png, load_image, save_image};

use crate::error::{Error, Result};

/// Channel layout of an [`Image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channels {
    Gray = 1,
    Rgb = 3,
    Rgba = 4,
}

impl Channels {
    pub fn count(self) -> usize {
        self as usize
    }

    pub fn has_alpha(self) -> bool {
        matches!(self, Channels::Rgba)
    }

    /// Number of colour (non-alpha) channels.
    pub fn color_count(self) -> usize {
        match self {
            Channels::Gray => 1,
            Channels::Rgb | Channels::Rgba => 3,
        }
    }
}

/// Owned 8-bit raster, row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: u32,
    height: u32,
    channels: Channels,
    data: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32, channels: Channels, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        let expected = width as usize * height as usize * channels.count();
        if data.len() != expected {
            return Err(Error::InvalidImage(format!(
                "{width}x{height}x{} needs {expected} samples, got {}",
                channels.count(),
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image with every sample set to `value`.
    ///
    /// Panics if either dimension is zero.
    pub fn filled(width: u32, height: u32, channels: Channels, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        let len = width as usize * height as usize * channels.count();
        Self {
            width,
            height,
            channels,
            data: vec![value; len],
        }
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    ///
    /// `f` must return exactly `channels.count()` samples.
    pub fn from_fn<F>(width: u32, height: u32, channels: Channels, mut f: F) -> Self
    where
        F: FnMut(u32, u32) -> [u8; 4],
    {
        let mut img = Self::filled(width, height, channels, 0);
        let n = channels.count();
        for y in 0..height {
            for x in 0..width {
                let px = f(x, y);
                let i = img.index(x, y);
                img.data[i..i + n].copy_from_slice(&px[..n]);
            }
        }
        img
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels.count()
    }

    #[inline]
    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let i = self.index(x, y);
        &self.data[i..i + self.channels.count()]
    }

    #[inline]
    pub fn pixel_mut(&mut self, x: u32, y: u32) -> &mut [u8] {
        let i = self.index(x, y);
        let n = self.channels.count();
        &mut self.data[i..i + n]
    }

    /// Same width, height and channel layout.
    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub fn bounds(&self) -> BoundingBox {
        BoundingBox {
            x: 0.0,
            y: 0.0,
            w: self.width as f64,
            h: self.height as f64,
        }
    }

    /// Splits an RGBA image into its RGB part and its alpha plane.
    pub fn split_alpha(&self) -> (Image, Option<Image>) {
        if !self.channels.has_alpha() {
            return (self.clone(), None);
        }
        let n = self.width as usize * self.height as usize;
        let mut rgb = Vec::with_capacity(n * 3);
        let mut alpha = Vec::with_capacity(n);
        for px in self.data.chunks_exact(4) {
            rgb.extend_from_slice(&px[..3]);
            alpha.push(px[3]);
        }
        (
            Image {
                width: self.width,
                height: self.height,
                channels: Channels::Rgb,
                data: rgb,
            },
            Some(Image {
                width: self.width,
                height: self.height,
                channels: Channels::Gray,
                data: alpha,
            }),
        )
    }
}

/// Rounds half away from zero and saturates to `[0, 255]`; NaN maps to 0.
///
/// Same result as `v.round().clamp(0.0, 255.0) as u8`, without the libm
/// call `round` becomes on baseline x86-64.
#[inline]
pub(crate) fn to_u8(v: f64) -> u8 {
    if v >= 255.0 {
        255
    } else if v > 0.0 {
        (v + 0.5) as u8
    } else {
        0
    }
}

/// `x.floor() as i64` for finite `x` in the `i64` range.
#[inline]
pub(crate) fn floor_i64(x: f64) -> i64 {
    let i = x as i64;
    if (i as f64) > x {
        i - 1
    } else {
        i
    }
}

/// ITU-R BT.601 luma of an RGB triple, rounded to the nearest integer.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    to_u8(0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
}

/// Converts to a single-channel luma image.
///
/// For RGBA input the alpha plane is returned separately and untouched.
/// Gray input is returned as-is, so the conversion is idempotent.
pub fn to_grayscale(img: &Image) -> (Image, Option<Image>) {
    match img.channels {
        Channels::Gray => (img.clone(), None),
        Channels::Rgb | Channels::Rgba => {
            let n = img.channels.count();
            let data: Vec<u8> = img
                .data
                .chunks_exact(n)
                .map(|px| luma(px[0], px[1], px[2]))
                .collect();
            let gray = Image {
                width: img.width,
                height: img.height,
                channels: Channels::Gray,
                data,
            };
            let alpha = img.split_alpha().1;
            (gray, alpha)
        }
    }
}

/// Axis-aligned rectangle in continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite()) {
            return Err(Error::InvalidBox(format!(
                "non-finite coordinates ({x}, {y}, {w}, {h})"
            )));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidBox(format!("non-positive size {w}x{h}")));
        }
        Ok(Self { x, y, w, h })
    }

    /// Box spanning `[x0, x1) x [y0, y1)`.
    pub fn from_edges(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(x0, y0, x1 - x0, y1 - y0)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + 0.5 * self.w, self.y + 0.5 * self.h)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            x: self.x + dx,
            y: self.y + dy,
            ..*self
        }
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn contains(&self, other: &BoundingBox) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    /// Overlap rectangle, or `None` when the boxes share no area.
    pub fn intersection(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 > x0 && y1 > y0 {
            Some(BoundingBox {
                x: x0,
                y: y0,
                w: span(x0, x1),
                h: span(y0, y1),
            })
        } else {
            None
        }
    }
}

/// Length `w` of `[lo, hi)` such that `lo + w <= hi` holds in floating point.
fn span(lo: f64, hi: f64) -> f64 {
    let mut w = hi - lo;
    while lo + w > hi && w > 0.0 {
        w = w.next_down();
    }
    w
}

/// Intersects `bbox` with the frame `[0, width] x [0, height]`.
///
/// A box already inside the frame is returned bit-for-bit unchanged.
pub fn clamp_box(bbox: &BoundingBox, width: u32, height: u32) -> Result<BoundingBox> {
    let frame = BoundingBox {
        x: 0.0,
        y: 0.0,
        w: width as f64,
        h: height as f64,
    };
    if frame.contains(bbox) {
        return Ok(*bbox);
    }
    bbox.intersection(&frame).ok_or(Error::EmptyBox)
}
