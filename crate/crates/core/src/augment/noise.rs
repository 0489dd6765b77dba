//! Classic 2D gradient (Perlin) noise.
//!
//! The permutation table is a Fisher-Yates shuffle of `0..=255` driven by a
//! ChaCha8 stream seeded with the caller's seed. Gradients are the four
//! diagonals `(+-1, +-1)`, which bounds the output to `[-1, 1]`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::imaging::floor_i64;

#[derive(Clone)]
pub struct Perlin {
    perm: [u8; 512],
}

impl Perlin {
    pub fn new(seed: u64) -> Self {
        let mut table: Vec<u8> = (0..=255u8).collect();
        table.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut perm = [0u8; 512];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = table[i & 255];
        }
        Self { perm }
    }

    pub fn get(&self, x: f64, y: f64) -> f64 {
        self.corner(Lattice::new(x), Lattice::new(y))
    }

    #[inline]
    fn corner(&self, lx: Lattice, ly: Lattice) -> f64 {
        let (xi, xf, yi, yf) = (lx.i, lx.f, ly.i, ly.f);
        let p = &self.perm;
        let aa = p[p[xi] as usize + yi];
        let ab = p[p[xi] as usize + yi + 1];
        let ba = p[p[xi + 1] as usize + yi];
        let bb = p[p[xi + 1] as usize + yi + 1];

        let x1 = lerp(lx.fade, grad(aa, xf, yf), grad(ba, xf - 1.0, yf));
        let x2 = lerp(lx.fade, grad(ab, xf, yf - 1.0), grad(bb, xf - 1.0, yf - 1.0));
        lerp(ly.fade, x1, x2).clamp(-1.0, 1.0)
    }

    /// Sum of `octaves` layers, each at double frequency and half amplitude,
    /// renormalised to `[-1, 1]`.
    pub fn fbm(&self, x: f64, y: f64, octaves: u32) -> f64 {
        let mut total = 0.0;
        let mut amplitude = 1.0;
        let mut frequency = 1.0;
        let mut norm = 0.0;
        for _ in 0..octaves.max(1) {
            total += amplitude * self.get(x * frequency, y * frequency);
            norm += amplitude;
            amplitude *= 0.5;
            frequency *= 2.0;
        }
        total / norm
    }
}

impl Perlin {
    /// [`Perlin::fbm`] at every `(xs[i], ys[j])`, row-major with `xs` along
    /// rows. Lattice terms are computed once per row and column.
    pub fn fbm_grid(&self, xs: &[f64], ys: &[f64], octaves: u32) -> Vec<f64> {
        let octaves = octaves.max(1);
        let scales: Vec<(f64, f64)> = (0..octaves).map(|o| (0.5f64.powi(o as i32), 2f64.powi(o as i32))).collect();
        let norm: f64 = scales.iter().map(|s| s.0).sum();
        let lattice = |vs: &[f64]| -> Vec<Vec<Lattice>> {
            scales
                .iter()
                .map(|&(_, freq)| vs.iter().map(|&v| Lattice::new(v * freq)).collect())
                .collect()
        };
        let (lx, ly) = (lattice(xs), lattice(ys));
        let mut out = vec![0.0; xs.len() * ys.len()];
        for (j, row) in out.chunks_exact_mut(xs.len().max(1)).enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                let mut total = 0.0;
                for (o, &(amp, _)) in scales.iter().enumerate() {
                    total += amp * self.corner(lx[o][i], ly[o][j]);
                }
                *v = total / norm;
            }
        }
        out
    }
}

/// Integer cell, fractional offset and fade weight of one coordinate.
#[derive(Clone, Copy)]
struct Lattice {
    i: usize,
    f: f64,
    fade: f64,
}

impl Lattice {
    #[inline]
    fn new(v: f64) -> Self {
        let v0 = floor_i64(v);
        let f = v - v0 as f64;
        Self {
            i: (v0 & 255) as usize,
            f,
            fade: fade(f),
        }
    }
}

/// One-off evaluation; builds the permutation table on every call, so use
/// [`Perlin`] directly when sampling many points.
pub fn perlin2(x: f64, y: f64, seed: u64) -> f64 {
    Perlin::new(seed).get(x, y)
}

#[inline]
fn fade(t: f64) -> f64 {
    t * t * t * (t * (t * 6.0 - 15.0) + 10.0)
}

#[inline]
fn lerp(t: f64, a: f64, b: f64) -> f64 {
    a + t * (b - a)
}

#[inline]
fn grad(hash: u8, x: f64, y: f64) -> f64 {
    match hash & 3 {
        0 => x + y,
        1 => -x + y,
        2 => x - y,
        _ => -x - y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn vanishes_on_lattice() {
        let n = Perlin::new(42);
        for x in -20i32..20 {
            for y in -20i32..20 {
                assert_eq!(n.get(x as f64, y as f64), 0.0);
            }
        }
        assert_eq!(perlin2(1e6, -3.0, 7), 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(perlin2(0.3, 0.7, 5), perlin2(0.3, 0.7, 5));
        let differs = (0..50).any(|i| {
            let x = 0.37 + i as f64 * 0.91;
            perlin2(x, 0.5, 1) != perlin2(x, 0.5, 2)
        });
        assert!(differs);
    }

    #[test]
    fn million_samples_stay_in_range() {
        let n = Perlin::new(9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut max_abs: f64 = 0.0;
        for _ in 0..1_000_000 {
            let x = rng.random_range(-500.0..500.0);
            let y = rng.random_range(-500.0..500.0);
            let v = n.get(x, y);
            assert!((-1.0..=1.0).contains(&v));
            max_abs = max_abs.max(v.abs());
        }
        // Not degenerate: the noise actually uses a good part of its range.
        assert!(max_abs > 0.5, "max |noise| = {max_abs}");
    }

    #[test]
    fn lipschitz_bound_by_sampling() {
        let n = Perlin::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst: f64 = 0.0;
        for _ in 0..200_000 {
            let x = rng.random_range(-100.0..100.0);
            let y = rng.random_range(-100.0..100.0);
            let h = rng.random_range(1e-6..1e-3);
            let k = ((n.get(x + h, y) - n.get(x, y)) / h).abs();
            let k2 = ((n.get(x, y + h) - n.get(x, y)) / h).abs();
            worst = worst.max(k).max(k2);
        }
        assert!(worst < 8.0, "empirical K = {worst}");
    }

    #[test]
    fn grid_matches_pointwise_fbm() {
        let n = Perlin::new(17);
        let xs: Vec<f64> = (0..37).map(|i| -3.1 + i as f64 * 0.27).collect();
        let ys: Vec<f64> = (0..23).map(|j| 200.4 + j as f64 / 48.0).collect();
        for octaves in [1, 3] {
            let grid = n.fbm_grid(&xs, &ys, octaves);
            for (j, &y) in ys.iter().enumerate() {
                for (i, &x) in xs.iter().enumerate() {
                    assert_eq!(grid[j * xs.len() + i], n.fbm(x, y, octaves));
                }
            }
        }
        assert!(n.fbm_grid(&[], &ys, 2).is_empty());
    }

    #[test]
    fn fbm_in_range() {
        let n = Perlin::new(11);
        for i in 0..10_000 {
            let v = n.fbm(i as f64 * 0.137, i as f64 * 0.071, 4);
            assert!((-1.0..=1.0).contains(&v));
        }
    }
}
