//! Procedural demo data: textured sky backgrounds, top-down quadcopter
//! sprites, and a synthetic single-drone video with ground truth. Everything
//! is a pure function of its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::augment::{ForegroundAsset, Perlin};
use crate::error::{Error, Result};
use crate::imaging::{Annotation, BoundingBox, Channels, Image};
use crate::residual::FrameSequence;

fn mix(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

fn smoothstep(lo: f64, hi: f64, v: f64) -> f64 {
    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Blue gradient sky with fractal clouds over a ragged tree line.
pub fn sky_background(width: u32, height: u32, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clouds = Perlin::new(rng.random());
    let ground = Perlin::new(rng.random());
    let cell = rng.random_range(0.25..0.6) * width.max(height) as f64;
    let cover = rng.random_range(-0.15..0.25);
    let horizon = rng.random_range(0.8..0.92) * height as f64;
    let zenith = [rng.random_range(60.0..110.0), rng.random_range(120.0..160.0), rng.random_range(190.0..230.0)];
    let haze = [190.0, 210.0, 235.0];

    Image::from_fn(width, height, Channels::Rgb, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        let edge = horizon + 0.04 * height as f64 * ground.fbm(fx / 25.0, 3.7, 3);
        if fy >= edge {
            let t = 0.5 + 0.5 * ground.fbm(fx / 6.0, fy / 6.0, 3);
            return [mix(20.0, 70.0, t) as u8, mix(45.0, 95.0, t) as u8, mix(20.0, 45.0, t) as u8, 0];
        }
        let t = (fy / horizon).clamp(0.0, 1.0);
        let c = clouds.fbm(fx / cell * 3.0, fy / cell * 3.0, 4);
        let k = smoothstep(cover, cover + 0.45, c) * 0.85;
        let px: [f64; 3] = std::array::from_fn(|i| mix(mix(zenith[i], haze[i], t), 245.0, k));
        [px[0].round() as u8, px[1].round() as u8, px[2].round() as u8, 0]
    })
}

/// Distance from `p` to the segment `a`-`b`.
fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let t = (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / (vx * vx + vy * vy)).clamp(0.0, 1.0);
    let (dx, dy) = (p.0 - a.0 - t * vx, p.1 - a.1 - t * vy);
    (dx * dx + dy * dy).sqrt()
}

/// Top-down quadcopter with anti-aliased edges (4x4 supersampling).
pub fn drone_asset(seed: u64) -> ForegroundAsset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.random_range(48..80u32);
    let h = (w as f64 * rng.random_range(0.6..0.9)).round() as u32;
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let tint: [f64; 3] = std::array::from_fn(|_| rng.random_range(20.0..90.0));
    let rotor_shade = rng.random_range(150.0..210.0);
    let arm_x = 0.32 * w as f64;
    let arm_y = 0.3 * h as f64;
    let rotor_rx = 0.17 * w as f64;
    let rotor_ry = 0.17 * h as f64;
    let hubs = [(cx - arm_x, cy - arm_y), (cx + arm_x, cy - arm_y), (cx - arm_x, cy + arm_y), (cx + arm_x, cy + arm_y)];

    let raster = Image::from_fn(w, h, Channels::Rgba, |x, y| {
        let mut body = 0.0;
        let mut rotor = 0.0;
        for sy in 0..4 {
            for sx in 0..4 {
                let p = (x as f64 + (sx as f64 + 0.5) / 4.0, y as f64 + (sy as f64 + 0.5) / 4.0);
                let in_body = ((p.0 - cx) / (0.16 * w as f64)).powi(2) + ((p.1 - cy) / (0.16 * h as f64)).powi(2) <= 1.0;
                let in_arm = hubs.iter().any(|&hub| segment_distance(p, (cx, cy), hub) <= 0.035 * h as f64 + 0.8);
                let in_rotor = hubs
                    .iter()
                    .any(|&(hx, hy)| ((p.0 - hx) / rotor_rx).powi(2) + ((p.1 - hy) / rotor_ry).powi(2) <= 1.0);
                if in_body || in_arm {
                    body += 1.0 / 16.0;
                } else if in_rotor {
                    rotor += 1.0 / 16.0;
                }
            }
        }
        let alpha = body + rotor * 0.6;
        if alpha <= 0.0 {
            return [0, 0, 0, 0];
        }
        let wb = body / (body + rotor);
        let c: [f64; 3] = std::array::from_fn(|i| mix(rotor_shade, tint[i], wb));
        [c[0] as u8, c[1] as u8, c[2] as u8, (alpha * 255.0).round() as u8]
    });
    ForegroundAsset::new(raster, format!("quadcopter_{seed}")).expect("sprite has opaque body")
}

/// `count` distinct sprites derived from `seed`.
pub fn drone_assets(count: usize, seed: u64) -> Vec<ForegroundAsset> {
    (0..count as u64)
        .map(|i| drone_asset(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i)))
        .collect()
}

/// Shape of the synthetic tracking scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub width: u32,
    pub height: u32,
    pub frames: u32,
    pub target_width: u32,
    pub target_height: u32,
    /// Length of the tracker loss event placed inside the sequence.
    pub loss_length: u32,
    pub fps: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            frames: 300,
            target_width: 64,
            target_height: 48,
            loss_length: 30,
            fps: 30.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig("scenario needs at least one non-empty frame".into()));
        }
        if self.target_width == 0 || self.target_height == 0 {
            return Err(Error::InvalidConfig("target must have positive size".into()));
        }
        if self.target_width >= self.width || self.target_height >= self.height {
            return Err(Error::InvalidConfig("target must be smaller than the frame".into()));
        }
        Ok(())
    }
}

/// Ground-truth track of the scenario plus where the tracker loses it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub ground_truth: Vec<Annotation>,
    /// `[start, end)` frame window.
    pub loss_event: (u64, u64),
}

/// Lissajous-like path keeping the whole target in frame. Box corners sit
/// on integer pixels.
pub fn trajectory(seed: u64, cfg: &ScenarioConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5CE7_A410);
    let (tw, th) = (cfg.target_width as f64, cfg.target_height as f64);
    let ax = ((cfg.width as f64 - tw) / 2.0 - 8.0).max(0.0);
    let ay = ((cfg.height as f64 - th) / 2.0 - 8.0).max(0.0);
    let px = rng.random_range(150.0..300.0);
    let py = rng.random_range(120.0..260.0);
    let phx = rng.random_range(0.0..std::f64::consts::TAU);
    let phy = rng.random_range(0.0..std::f64::consts::TAU);

    let max_x = (cfg.width - cfg.target_width) as f64;
    let max_y = (cfg.height - cfg.target_height) as f64;
    let ground_truth = (0..cfg.frames as u64)
        .map(|t| {
            let tf = t as f64;
            let cx = cfg.width as f64 / 2.0 + ax * (std::f64::consts::TAU * tf / px + phx).sin();
            let cy = cfg.height as f64 / 2.0 + ay * (std::f64::consts::TAU * tf / py + phy).sin();
            let x = (cx - tw / 2.0).round().clamp(0.0, max_x);
            let y = (cy - th / 2.0).round().clamp(0.0, max_y);
            Ok(Annotation::ground_truth(t, BoundingBox::new(x, y, tw, th)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let len = cfg.loss_length.min(cfg.frames) as u64;
    let n = cfg.frames as u64;
    let lo = (n / 6).min(n - len);
    let hi = (n - n / 6).saturating_sub(len).max(lo);
    let start = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    Ok(Trajectory {
        ground_truth,
        loss_event: (start, start + len),
    })
}

/// Opaque target sprite filling exactly `w x h` pixels: dark airframe with
/// lighter rotor discs in the corners.
fn target_sprite(w: u32, h: u32) -> Image {
    let r = w.min(h) as f64 * 0.22;
    let hubs = [(r, r), (w as f64 - r, r), (r, h as f64 - r), (w as f64 - r, h as f64 - r)];
    Image::from_fn(w, h, Channels::Rgb, |x, y| {
        let p = (x as f64 + 0.5, y as f64 + 0.5);
        if hubs.iter().any(|&(hx, hy)| (p.0 - hx).hypot(p.1 - hy) <= r) {
            [150, 150, 160, 0]
        } else {
            [35, 35, 40, 0]
        }
    })
}

/// Renders the sprite at every ground-truth box over a static sky.
pub fn render(cfg: &ScenarioConfig, seed: u64, trajectory: &Trajectory) -> Result<FrameSequence> {
    cfg.validate()?;
    let bg = sky_background(cfg.width, cfg.height, seed);
    let sprite = target_sprite(cfg.target_width, cfg.target_height);
    let mut frames = Vec::with_capacity(cfg.frames as usize);
    for a in &trajectory.ground_truth {
        let mut f = bg.clone();
        let (ox, oy) = (a.bbox.x() as u32, a.bbox.y() as u32);
        for y in 0..sprite.height() {
            for x in 0..sprite.width() {
                f.pixel_mut(ox + x, oy + y).copy_from_slice(sprite.pixel(x, y));
            }
        }
        frames.push(f);
    }
    FrameSequence::new(frames, cfg.fps)
}

/// A rendered scenario: frames, ground truth and the loss window.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub frames: FrameSequence,
    pub trajectory: Trajectory,
}

pub fn scenario(seed: u64, cfg: &ScenarioConfig) -> Result<Scenario> {
    let trajectory = trajectory(seed, cfg)?;
    let frames = render(cfg, seed, &trajectory)?;
    Ok(Scenario { frames, trajectory })
}
