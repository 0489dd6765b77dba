//! Residual-frame preprocessing: absolute per-channel differences between
//! consecutive frames, optionally after cancelling an integer camera pan.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Image;

/// Ordered frames sharing one size and channel layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Image>,
    fps: f64,
}

impl FrameSequence {
    pub fn new(frames: Vec<Image>, fps: f64) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidImage("frame sequence is empty".into()))?;
        for (i, f) in frames.iter().enumerate().skip(1) {
            if !f.same_shape(first) {
                return Err(Error::DimensionMismatch(format!(
                    "frame {i} is {}x{} {:?}, frame 0 is {}x{} {:?}",
                    f.width(),
                    f.height(),
                    f.channels(),
                    first.width(),
                    first.height(),
                    first.channels()
                )));
            }
        }
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[Image] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Image> {
        self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn dims(&self) -> (u32, u32) {
        self.frames[0].dims()
    }
}

/// Integer global shift between two frames: `cur(x, y) ~ prev(x + dx, y + dy)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Shift {
    pub dx: i32,
    pub dy: i32,
}

fn check_same(cur: &Image, prev: &Image) -> Result<()> {
    if cur.same_shape(prev) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{}x{} {:?} vs {}x{} {:?}",
            cur.width(),
            cur.height(),
            cur.channels(),
            prev.width(),
            prev.height(),
            prev.channels()
        )))
    }
}

/// `|cur - prev|` on every channel. Alpha, if any, is differenced too.
pub fn residual_frame(cur: &Image, prev: &Image) -> Result<Image> {
    check_same(cur, prev)?;
    let mut out = cur.clone();
    for (o, &p) in out.data_mut().iter_mut().zip(prev.data()) {
        *o = o.abs_diff(p);
    }
    Ok(out)
}

/// Range of `x` for which both `x` and `x + d` fall inside `0..n`.
fn overlap(n: u32, d: i32) -> (u32, u32) {
    let n = n as i64;
    let d = d as i64;
    let lo = (-d).max(0).min(n);
    let hi = (n - d).min(n).max(lo);
    (lo as u32, hi as u32)
}

/// Sum of absolute differences and sample count over the overlap of `cur`
/// and `prev` shifted by `s`.
fn shifted_sad(cur: &Image, prev: &Image, s: Shift) -> (u64, u64) {
    let n = cur.channels().count();
    let (x0, x1) = overlap(cur.width(), s.dx);
    let (y0, y1) = overlap(cur.height(), s.dy);
    if x0 >= x1 || y0 >= y1 {
        return (0, 0);
    }
    let row = (x1 - x0) as usize * n;
    let mut sad = 0u64;
    for y in y0..y1 {
        let c = cur.index(x0, y);
        let p = prev.index((x0 as i64 + s.dx as i64) as u32, (y as i64 + s.dy as i64) as u32);
        sad += cur.data()[c..c + row]
            .iter()
            .zip(&prev.data()[p..p + row])
            .map(|(&a, &b)| a.abs_diff(b) as u64)
            .sum::<u64>();
    }
    (sad, ((x1 - x0) as u64) * ((y1 - y0) as u64) * n as u64)
}

/// Exhaustive search for the integer shift in `[-radius, radius]^2`
/// minimising the mean absolute difference over the overlap.
///
/// Means are compared exactly as fractions. Ties go to the smallest
/// `|dx| + |dy|`, then the lexicographically smallest `(dx, dy)`. Shifts
/// with no overlap are skipped.
pub fn estimate_global_translation(cur: &Image, prev: &Image, radius: u32) -> Result<Shift> {
    check_same(cur, prev)?;
    let r = radius as i32;
    let mut best: Option<(Shift, u64, u64)> = None;
    for dx in -r..=r {
        for dy in -r..=r {
            let s = Shift { dx, dy };
            let (sad, count) = shifted_sad(cur, prev, s);
            if count == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((b, bsad, bcount)) => {
                    let lhs = sad as u128 * bcount as u128;
                    let rhs = bsad as u128 * count as u128;
                    lhs < rhs
                        || (lhs == rhs
                            && (dx.abs() + dy.abs(), dx, dy) < (b.dx.abs() + b.dy.abs(), b.dx, b.dy))
                }
            };
            if better {
                best = Some((s, sad, count));
            }
        }
    }
    Ok(best.map(|b| b.0).unwrap_or_default())
}

/// Residual of `cur` against `prev` shifted by `s`. Pixels whose shifted
/// source falls outside `prev` get zero residual.
pub fn compensated_residual(cur: &Image, prev: &Image, s: Shift) -> Result<Image> {
    check_same(cur, prev)?;
    let n = cur.channels().count();
    let mut out = Image::filled(cur.width(), cur.height(), cur.channels(), 0);
    let (x0, x1) = overlap(cur.width(), s.dx);
    let (y0, y1) = overlap(cur.height(), s.dy);
    if x0 >= x1 || y0 >= y1 {
        return Ok(out);
    }
    let row = (x1 - x0) as usize * n;
    for y in y0..y1 {
        let c = cur.index(x0, y);
        let p = prev.index((x0 as i64 + s.dx as i64) as u32, (y as i64 + s.dy as i64) as u32);
        let dst = &mut out.data_mut()[c..c + row];
        for ((o, &a), &b) in dst.iter_mut().zip(&cur.data()[c..c + row]).zip(&prev.data()[p..p + row]) {
            *o = a.abs_diff(b);
        }
    }
    Ok(out)
}

/// Residual sequence and the shift used for every frame (frame 0 has none
/// and is all zero).
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualOutput {
    pub residuals: FrameSequence,
    pub shifts: Vec<Shift>,
}

/// Residuals of every consecutive pair. With `compensate`, each previous
/// frame is first aligned by [`estimate_global_translation`].
pub fn residual_sequence(seq: &FrameSequence, compensate: bool, radius: u32) -> Result<ResidualOutput> {
    let frames = seq.frames();
    let first = &frames[0];
    let pairs: Vec<(Image, Shift)> = frames
        .par_windows(2)
        .map(|w| {
            let (prev, cur) = (&w[0], &w[1]);
            let s = if compensate {
                estimate_global_translation(cur, prev, radius)?
            } else {
                Shift::default()
            };
            Ok((compensated_residual(cur, prev, s)?, s))
        })
        .collect::<Result<_>>()?;

    let mut residuals = Vec::with_capacity(frames.len());
    let mut shifts = Vec::with_capacity(frames.len());
    residuals.push(Image::filled(first.width(), first.height(), first.channels(), 0));
    shifts.push(Shift::default());
    for (img, s) in pairs {
        residuals.push(img);
        shifts.push(s);
    }
    Ok(ResidualOutput {
        residuals: FrameSequence::new(residuals, seq.fps())?,
        shifts,
    })
}
