//! Numerics of adversarial visible-to-thermal translation: gram-matrix
//! texture descriptors, the cycle-consistency and perceptual texture GAN
//! losses, and their weighted total. Generators, discriminators and feature
//! extractors stay abstract (any closure or type implementing the traits);
//! training is out of scope.
//!
//! Also hosts the simple monochrome conversion used for thermal foregrounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{luma, Channels, Image};

/// Discriminator outputs are clamped to `[EPS, 1 - EPS]` before `ln`.
pub const DISCRIMINATOR_EPS: f64 = 1e-7;

/// Dense row-major tensor of finite `f64` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl TryFrom<RawTensor> for Tensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        Tensor::new(raw.shape, raw.data)
    }
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Shape(format!(
                "shape {shape:?} holds {n} values, got {}",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("non-finite value {v}")));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Same data, new shape.
    pub fn reshape(&self, shape: Vec<usize>) -> Result<Tensor> {
        Tensor::new(shape, self.data.clone())
    }

    /// Mean of `|self - other|` over all elements.
    pub fn mean_abs_diff(&self, other: &Tensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "cannot compare {:?} with {:?}",
                self.shape, other.shape
            )));
        }
        if self.data.is_empty() {
            return Ok(0.0);
        }
        let total: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).sum();
        Ok(total / self.data.len() as f64)
    }
}

/// Shape-preserving map between domains (a generator).
pub trait Mapping {
    fn apply(&self, t: &Tensor) -> Tensor;
}

impl<F: Fn(&Tensor) -> Tensor> Mapping for F {
    fn apply(&self, t: &Tensor) -> Tensor {
        self(t)
    }
}

/// Probability that the input is a real sample of the discriminator's domain.
pub trait Discriminator {
    fn score(&self, t: &Tensor) -> f64;
}

impl<F: Fn(&Tensor) -> f64> Discriminator for F {
    fn score(&self, t: &Tensor) -> f64 {
        self(t)
    }
}

/// Produces a `C x H x W` feature map.
pub trait FeatureExtractor {
    fn features(&self, t: &Tensor) -> Tensor;
}

impl<F: Fn(&Tensor) -> Tensor> FeatureExtractor for F {
    fn features(&self, t: &Tensor) -> Tensor {
        self(t)
    }
}

/// Element-wise `scale * x + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub shift: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { scale: 1.0, shift: 0.0 };
}

impl Mapping for AffineMap {
    fn apply(&self, t: &Tensor) -> Tensor {
        t.map(|v| self.scale * v + self.shift)
    }
}

/// Always answers the same probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDiscriminator(pub f64);

impl Discriminator for ConstantDiscriminator {
    fn score(&self, _: &Tensor) -> f64 {
        self.0
    }
}

/// `sigmoid(weight * mean(t) + bias)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticDiscriminator {
    pub weight: f64,
    pub bias: f64,
}

impl Discriminator for LogisticDiscriminator {
    fn score(&self, t: &Tensor) -> f64 {
        let mean = if t.is_empty() {
            0.0
        } else {
            t.data().iter().sum::<f64>() / t.len() as f64
        };
        1.0 / (1.0 + (-(self.weight * mean + self.bias)).exp())
    }
}

/// Treats the input itself as the feature map, lifting 1-D and 2-D inputs
/// to `1 x 1 x N` and `1 x H x W`.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityFeatures;

impl FeatureExtractor for IdentityFeatures {
    fn features(&self, t: &Tensor) -> Tensor {
        let shape = match t.shape() {
            [n] => vec![1, 1, *n],
            [h, w] => vec![1, *h, *w],
            s => s.to_vec(),
        };
        Tensor {
            shape,
            data: t.data().to_vec(),
        }
    }
}

/// Gram matrix of a `C x H x W` feature map, normalised by `C * H * W`.
pub fn gram_matrix(features: &Tensor) -> Result<Tensor> {
    let &[c, h, w] = features.shape() else {
        return Err(Error::Shape(format!(
            "gram matrix needs a C x H x W tensor, got {:?}",
            features.shape()
        )));
    };
    let hw = h * w;
    let norm = (c * hw) as f64;
    let f = features.data();
    let mut g = vec![0.0; c * c];
    for i in 0..c {
        let fi = &f[i * hw..(i + 1) * hw];
        for j in i..c {
            let fj = &f[j * hw..(j + 1) * hw];
            let dot: f64 = fi.iter().zip(fj).map(|(a, b)| a * b).sum();
            g[i * c + j] = dot / norm;
            g[j * c + i] = dot / norm;
        }
    }
    Tensor::new(vec![c, c], g)
}

fn checked_apply(g: &dyn Mapping, t: &Tensor) -> Result<Tensor> {
    let out = g.apply(t);
    if out.shape() != t.shape() {
        return Err(Error::Shape(format!(
            "mapping changed shape {:?} -> {:?}",
            t.shape(),
            out.shape()
        )));
    }
    Ok(out)
}

fn batch_mean(values: impl ExactSizeIterator<Item = Result<f64>>) -> Result<f64> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let mut total = 0.0;
    for v in values {
        total += v?;
    }
    Ok(total / n as f64)
}

/// Mean per-element L1 reconstruction error of `x -> gA -> gB` over `xs`
/// plus that of `y -> gB -> gA` over `ys`.
pub fn cycle_consistency_loss(xs: &[Tensor], ys: &[Tensor], ga: &dyn Mapping, gb: &dyn Mapping) -> Result<f64> {
    let forward = batch_mean(xs.iter().map(|x| {
        let back = checked_apply(gb, &checked_apply(ga, x)?)?;
        back.mean_abs_diff(x)
    }))?;
    let backward = batch_mean(ys.iter().map(|y| {
        let back = checked_apply(ga, &checked_apply(gb, y)?)?;
        back.mean_abs_diff(y)
    }))?;
    Ok(forward + backward)
}

fn clamped_score(d: &dyn Discriminator, t: &Tensor) -> f64 {
    let s = d.score(t);
    if s.is_nan() {
        return DISCRIMINATOR_EPS;
    }
    s.clamp(DISCRIMINATOR_EPS, 1.0 - DISCRIMINATOR_EPS)
}

/// Perceptual texture GAN loss for translating `xs` into the domain of `ys`:
/// `mean_y ln D(gram(phi(y))) + mean_x ln(1 - D(gram(phi(G(x)))))`.
pub fn texture_gan_loss(
    xs: &[Tensor],
    ys: &[Tensor],
    g: &dyn Mapping,
    d: &dyn Discriminator,
    phi: &dyn FeatureExtractor,
) -> Result<f64> {
    let real = batch_mean(ys.iter().map(|y| {
        let gram = gram_matrix(&phi.features(y))?;
        Ok(clamped_score(d, &gram).ln())
    }))?;
    let fake = batch_mean(xs.iter().map(|x| {
        let gram = gram_matrix(&phi.features(&checked_apply(g, x)?))?;
        Ok((1.0 - clamped_score(d, &gram)).ln())
    }))?;
    Ok(real + fake)
}

/// Non-negative weight of the cycle-consistency term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda: f64,
}

impl LossWeights {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidConfig(format!("lambda {lambda} must be finite and >= 0")));
        }
        Ok(Self { lambda })
    }
}

/// `lambda * L_cycle + L_tex(gA, dB; X -> Y) + L_tex(gB, dA; Y -> X)`.
#[allow(clippy::too_many_arguments)]
pub fn total_loss(
    xs: &[Tensor],
    ys: &[Tensor],
    ga: &dyn Mapping,
    gb: &dyn Mapping,
    da: &dyn Discriminator,
    db: &dyn Discriminator,
    phi: &dyn FeatureExtractor,
    weights: LossWeights,
) -> Result<f64> {
    let cycle = cycle_consistency_loss(xs, ys, ga, gb)?;
    let to_y = texture_gan_loss(xs, ys, ga, db, phi)?;
    let to_x = texture_gan_loss(ys, xs, gb, da, phi)?;
    Ok(weights.lambda * cycle + to_y + to_x)
}

/// Parameters of the monochrome thermal look: luma is pulled toward
/// `target_gray` with weight `blend`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonochromeParams {
    pub target_gray: f64,
    pub blend: f64,
}

impl Default for MonochromeParams {
    fn default() -> Self {
        Self {
            target_gray: 180.0,
            blend: 0.6,
        }
    }
}

/// Converts a visible-light image to a flat, nearly uniform gray:
/// `round(luma * (1 - blend) + target_gray * blend)`.
///
/// The output keeps the input layout: every colour channel carries the new
/// gray and alpha is preserved.
pub fn monochrome_thermal(img: &Image, params: MonochromeParams) -> Image {
    let n = img.channels().count();
    let mut out = img.clone();
    for px in out.data_mut().chunks_exact_mut(n) {
        let g = match img.channels() {
            Channels::Gray => px[0],
            _ => luma(px[0], px[1], px[2]),
        };
        let v = (g as f64 * (1.0 - params.blend) + params.target_gray * params.blend)
            .round()
            .clamp(0.0, 255.0) as u8;
        let colors = img.channels().color_count();
        px[..colors].fill(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(shape: &[usize], data: &[f64]) -> Tensor {
        Tensor::new(shape.to_vec(), data.to_vec()).unwrap()
    }

    #[test]
    fn tensor_validation() {
        assert!(Tensor::new(vec![2, 2], vec![1.0; 3]).is_err());
        assert!(Tensor::new(vec![1], vec![f64::NAN]).is_err());
        let parsed: Tensor = serde_json::from_str(r#"{"shape":[1,2],"data":[1.0,2.0]}"#).unwrap();
        assert_eq!(parsed, t(&[1, 2], &[1.0, 2.0]));
        assert!(serde_json::from_str::<Tensor>(r#"{"shape":[3],"data":[1.0]}"#).is_err());
    }

    #[test]
    fn gram_hand_values() {
        assert_eq!(gram_matrix(&Tensor::zeros(vec![3, 2, 2])).unwrap().data(), &[0.0; 9]);
        // (1*1 + 2*2) / (1*1*2)
        assert_eq!(gram_matrix(&t(&[1, 1, 2], &[1.0, 2.0])).unwrap().data(), &[2.5]);
        // Two identical channels: every entry equal.
        let g = gram_matrix(&t(&[2, 1, 3], &[1.0, -2.0, 3.0, 1.0, -2.0, 3.0])).unwrap();
        let d = g.data();
        assert_eq!(d[0], d[1]);
        assert_eq!(d[1], d[3]);
        assert!(gram_matrix(&t(&[4], &[1.0; 4])).is_err());
    }

    #[test]
    fn cycle_loss_values() {
        let xs = vec![t(&[1, 2, 2], &[0.5, -1.0, 2.0, 3.0])];
        let ys = vec![t(&[1, 1, 3], &[1.0, 2.0, 3.0]), t(&[1, 1, 3], &[0.0, 0.0, 0.0])];
        let id = AffineMap::IDENTITY;
        assert_eq!(cycle_consistency_loss(&xs, &ys, &id, &id).unwrap(), 0.0);

        let shift = AffineMap { scale: 1.0, shift: 1.0 };
        assert_eq!(cycle_consistency_loss(&xs, &ys, &id, &shift).unwrap(), 2.0);
    }

    #[test]
    fn cycle_loss_errors() {
        let xs = vec![t(&[2], &[1.0, 2.0])];
        let id = AffineMap::IDENTITY;
        assert!(matches!(cycle_consistency_loss(&[], &xs, &id, &id), Err(Error::EmptyBatch)));
        let squash = |x: &Tensor| Tensor::zeros(vec![x.len() + 1]);
        assert!(matches!(
            cycle_consistency_loss(&xs, &xs, &squash, &id),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn texture_loss_half_discriminator() {
        let xs = vec![t(&[2, 2, 2], &[1.0; 8])];
        let ys = vec![t(&[2, 2, 2], &[0.5; 8]), t(&[2, 2, 2], &[-0.5; 8])];
        let v = texture_gan_loss(&xs, &ys, &AffineMap::IDENTITY, &ConstantDiscriminator(0.5), &IdentityFeatures).unwrap();
        assert!((v - 2.0 * 0.5f64.ln()).abs() < 1e-12);
        assert!((v + 1.3862944).abs() < 1e-7);
    }

    #[test]
    fn texture_loss_clamp_boundaries() {
        let real = vec![t(&[1, 1, 1], &[1.0])];
        let fake_src = vec![t(&[1, 1, 1], &[-1.0])];
        // Real gram = 1, translated gram = 1 after identity... use a map that zeroes instead.
        let zero = AffineMap { scale: 0.0, shift: 0.0 };
        let d = |g: &Tensor| if g.data()[0] > 0.5 { 1.0 } else { 0.0 };
        let v = texture_gan_loss(&fake_src, &real, &zero, &d, &IdentityFeatures).unwrap();
        let want = 2.0 * (1.0 - DISCRIMINATOR_EPS).ln();
        assert!((v - want).abs() < 1e-15);
        assert!(v <= 0.0 && v > -1e-6);

        // Discriminator completely fooled: both terms hit the lower clamp.
        let fooled = |g: &Tensor| if g.data()[0] > 0.5 { 0.0 } else { 1.0 };
        let v = texture_gan_loss(&fake_src, &real, &zero, &fooled, &IdentityFeatures).unwrap();
        assert!((v - 2.0 * DISCRIMINATOR_EPS.ln()).abs() < 1e-9);
    }

    #[test]
    fn total_loss_closed_form() {
        let xs = vec![t(&[1, 2, 2], &[0.1, 0.2, 0.3, 0.4])];
        let ys = vec![t(&[1, 2, 2], &[0.9, 0.8, 0.7, 0.6])];
        let id = AffineMap::IDENTITY;
        let half = ConstantDiscriminator(0.5);
        let v = total_loss(&xs, &ys, &id, &id, &half, &half, &IdentityFeatures, LossWeights::new(10.0).unwrap()).unwrap();
        assert!((v - 4.0 * 0.5f64.ln()).abs() < 1e-12);
        assert!((v + 2.7725887).abs() < 1e-7);
    }

    #[test]
    fn total_loss_is_affine_in_lambda() {
        let xs = vec![t(&[1, 2, 2], &[0.1, 0.2, 0.3, 0.4])];
        let ys = vec![t(&[1, 2, 2], &[0.9, 0.8, 0.7, 0.6])];
        let ga = AffineMap { scale: 0.5, shift: 0.2 };
        let gb = AffineMap { scale: 1.5, shift: -0.1 };
        let da = LogisticDiscriminator { weight: 3.0, bias: -0.2 };
        let db = LogisticDiscriminator { weight: -1.0, bias: 0.4 };
        let phi = IdentityFeatures;
        let cycle = cycle_consistency_loss(&xs, &ys, &ga, &gb).unwrap();
        let l0 = total_loss(&xs, &ys, &ga, &gb, &da, &db, &phi, LossWeights::new(0.0).unwrap()).unwrap();
        let tex = texture_gan_loss(&xs, &ys, &ga, &db, &phi).unwrap() + texture_gan_loss(&ys, &xs, &gb, &da, &phi).unwrap();
        assert_eq!(l0, tex);
        let l1 = total_loss(&xs, &ys, &ga, &gb, &da, &db, &phi, LossWeights::new(1.0).unwrap()).unwrap();
        let l2 = total_loss(&xs, &ys, &ga, &gb, &da, &db, &phi, LossWeights::new(2.0).unwrap()).unwrap();
        assert!(((l2 - l1) - cycle).abs() < 1e-12);
        assert!(LossWeights::new(-1.0).is_err());
    }

    #[test]
    fn monochrome_examples() {
        let p = MonochromeParams::default();
        let white = Image::filled(1, 1, Channels::Rgb, 255);
        assert_eq!(monochrome_thermal(&white, p).data(), &[210, 210, 210]);
        let gray = Image::filled(1, 1, Channels::Rgb, 180);
        assert_eq!(monochrome_thermal(&gray, p).data(), &[180, 180, 180]);
        let black = Image::filled(1, 1, Channels::Rgba, 0);
        assert_eq!(monochrome_thermal(&black, p).data(), &[108, 108, 108, 0]);
    }

    #[test]
    fn monochrome_range_is_compressed() {
        let p = MonochromeParams::default();
        let img = Image::from_fn(256, 3, Channels::Rgb, |x, y| {
            let v = x as u8;
            match y {
                0 => [v, v, v, 0],
                1 => [v, 255 - v, v / 2, 0],
                _ => [255 - v, v / 3, v, 0],
            }
        });
        let out = monochrome_thermal(&img, p);
        assert!(out.data().iter().all(|&v| (108..=210).contains(&v)));
    }
}
