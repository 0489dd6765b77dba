//! Seeded stand-ins for a CNN detector and a learned tracker, driven by
//! ground truth. Randomness is drawn from a generator re-seeded on every
//! frame, so the output for a frame does not depend on which other frames
//! were queried or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::{Detector, Tracker};
use crate::error::{Error, Result};
use crate::eval::iou;
use crate::imaging::{Annotation, BoundingBox, Image};

/// Score jitter added to true detections when localisation noise is on.
const SCORE_NOISE_SIGMA: f64 = 0.05;
const FALSE_POSITIVE_MAX_SCORE: f64 = 0.4;

fn frame_rng(seed: u64, frame_idx: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(frame_idx as u128 * 1024);
    rng
}

fn index_gt(gt: &[Annotation]) -> Vec<Option<BoundingBox>> {
    let len = gt.iter().map(|a| a.frame as usize + 1).max().unwrap_or(0);
    let mut out = vec![None; len];
    for a in gt {
        out[a.frame as usize].get_or_insert(a.bbox);
    }
    out
}

fn normal(sigma: f64) -> Option<Normal<f64>> {
    (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite positive sigma"))
}

/// Detector that reports the ground-truth box with Gaussian localisation
/// noise, misses it with probability `miss_rate`, and adds a Poisson number
/// of low-scoring false positives per frame.
#[derive(Debug, Clone)]
pub struct SimulatedDetector {
    gt: Vec<Option<BoundingBox>>,
    miss_rate: f64,
    fp_rate: f64,
    loc_noise: Option<Normal<f64>>,
    seed: u64,
}

impl SimulatedDetector {
    pub fn new(gt: &[Annotation], miss_rate: f64, fp_rate: f64, loc_noise_sigma: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&miss_rate) {
            return Err(Error::InvalidConfig(format!("miss rate {miss_rate} outside [0, 1]")));
        }
        if !(fp_rate >= 0.0 && fp_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!("false positive rate {fp_rate} must be >= 0")));
        }
        if !(loc_noise_sigma >= 0.0 && loc_noise_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("location noise {loc_noise_sigma} must be >= 0")));
        }
        Ok(Self {
            gt: index_gt(gt),
            miss_rate,
            fp_rate,
            loc_noise: normal(loc_noise_sigma),
            seed,
        })
    }

    fn gt_at(&self, frame_idx: u64) -> Option<BoundingBox> {
        self.gt.get(frame_idx as usize).copied().flatten()
    }
}

impl Detector for SimulatedDetector {
    fn detect(&mut self, frame_idx: u64, frame: &Image) -> Result<Vec<(BoundingBox, f64)>> {
        let mut rng = frame_rng(self.seed, frame_idx, 0);
        let mut out = Vec::new();
        let gt = self.gt_at(frame_idx);

        let hit = !rng.random_bool(self.miss_rate);
        if let (Some(g), true) = (gt, hit) {
            let bbox = match &self.loc_noise {
                Some(n) => BoundingBox::new(
                    g.x() + n.sample(&mut rng),
                    g.y() + n.sample(&mut rng),
                    (g.w() + n.sample(&mut rng)).max(1.0),
                    (g.h() + n.sample(&mut rng)).max(1.0),
                )?,
                None => g,
            };
            let jitter = match &self.loc_noise {
                Some(_) => Normal::new(0.0, SCORE_NOISE_SIGMA).expect("constant sigma").sample(&mut rng),
                None => 0.0,
            };
            out.push((bbox, (iou(&bbox, &g) + jitter).clamp(0.0, 1.0)));
        }

        let n_fp = if self.fp_rate > 0.0 {
            Poisson::new(self.fp_rate).expect("positive rate").sample(&mut rng) as usize
        } else {
            0
        };
        let (fw, fh) = (frame.width() as f64, frame.height() as f64);
        let (bw, bh) = gt.map(|g| (g.w(), g.h())).unwrap_or((fw / 8.0, fh / 8.0));
        for _ in 0..n_fp {
            let w = (bw * rng.random_range(0.5..1.5)).min(fw);
            let h = (bh * rng.random_range(0.5..1.5)).min(fh);
            let x = rng.random_range(0.0..=fw - w);
            let y = rng.random_range(0.0..=fh - h);
            let score = rng.random_range(0.0..=FALSE_POSITIVE_MAX_SCORE);
            out.push((BoundingBox::new(x, y, w, h)?, score));
        }
        Ok(out)
    }

    fn score_at(&mut self, frame_idx: u64, _: &Image, bbox: &BoundingBox) -> Result<f64> {
        Ok(self.gt_at(frame_idx).map_or(0.0, |g| iou(bbox, &g)))
    }
}

/// Box held relative to the ground truth: `x = gt.x + dx`, `w = gt.w * sw`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Offset {
    dx: f64,
    dy: f64,
    sw: f64,
    sh: f64,
}

impl Offset {
    fn between(bbox: &BoundingBox, g: &BoundingBox) -> Self {
        Self {
            dx: bbox.x() - g.x(),
            dy: bbox.y() - g.y(),
            sw: bbox.w() / g.w(),
            sh: bbox.h() / g.h(),
        }
    }

    fn apply(&self, g: &BoundingBox) -> Result<BoundingBox> {
        BoundingBox::new(g.x() + self.dx, g.y() + self.dy, g.w() * self.sw, g.h() * self.sh)
    }
}

#[derive(Debug, Clone)]
struct TrackerState {
    /// `None` until the box can be related to a ground-truth frame.
    offset: Option<Offset>,
    last_box: BoundingBox,
    last_gt: Option<BoundingBox>,
    stale: Option<BoundingBox>,
    score: f64,
}

/// Tracker that follows the ground truth while accumulating a Gaussian
/// random-walk drift of `drift` pixels per axis per frame. Inside a loss
/// event `[start, end)` it freezes on its last box and halves its score
/// every frame; afterwards it resumes from the frozen box, now offset from
/// the target.
#[derive(Debug, Clone)]
pub struct SimulatedTracker {
    gt: Vec<Option<BoundingBox>>,
    drift: Option<Normal<f64>>,
    loss_events: Vec<(u64, u64)>,
    seed: u64,
    state: Option<TrackerState>,
}

impl SimulatedTracker {
    pub fn new(gt: &[Annotation], drift: f64, loss_events: Vec<(u64, u64)>, seed: u64) -> Result<Self> {
        if !(drift >= 0.0 && drift.is_finite()) {
            return Err(Error::InvalidConfig(format!("drift {drift} must be >= 0")));
        }
        if let Some(&(s, e)) = loss_events.iter().find(|(s, e)| s >= e) {
            return Err(Error::InvalidConfig(format!("loss event {s}..{e} is empty")));
        }
        Ok(Self {
            gt: index_gt(gt),
            drift: normal(drift),
            loss_events,
            seed,
            state: None,
        })
    }

    fn gt_at(&self, frame_idx: u64) -> Option<BoundingBox> {
        self.gt.get(frame_idx as usize).copied().flatten()
    }

    fn in_loss(&self, frame_idx: u64) -> bool {
        self.loss_events.iter().any(|&(s, e)| (s..e).contains(&frame_idx))
    }
}

impl Tracker for SimulatedTracker {
    fn init(&mut self, frame_idx: u64, _: &Image, bbox: BoundingBox) -> Result<()> {
        let g = self.gt_at(frame_idx);
        let in_loss = self.in_loss(frame_idx);
        self.state = Some(TrackerState {
            offset: g.map(|g| Offset::between(&bbox, &g)),
            last_box: bbox,
            last_gt: g,
            stale: in_loss.then_some(bbox),
            score: g.map_or(1.0, |g| iou(&bbox, &g)),
        });
        Ok(())
    }

    fn update(&mut self, frame_idx: u64, _: &Image) -> Result<(BoundingBox, f64)> {
        let in_loss = self.in_loss(frame_idx);
        let g = self.gt_at(frame_idx);
        let mut rng = frame_rng(self.seed, frame_idx, 1);
        let drift = self.drift;
        let st = self.state.as_mut().ok_or(Error::UpdateBeforeInit)?;

        if in_loss {
            let stale = *st.stale.get_or_insert(st.last_box);
            st.score *= 0.5;
            st.last_box = stale;
            if g.is_some() {
                st.last_gt = g;
            }
            return Ok((stale, st.score));
        }

        if let Some(stale) = st.stale.take() {
            // Resume from the frozen box, tied to wherever the target was
            // when the tracker lost it.
            st.offset = st.last_gt.map(|lg| Offset::between(&stale, &lg));
        }
        let Some(g) = g else {
            st.score *= 0.5;
            return Ok((st.last_box, st.score));
        };
        let mut off = st.offset.unwrap_or_else(|| Offset::between(&st.last_box, &g));
        if let Some(n) = drift {
            off.dx += n.sample(&mut rng);
            off.dy += n.sample(&mut rng);
        }
        let bbox = off.apply(&g)?;
        st.offset = Some(off);
        st.last_box = bbox;
        st.last_gt = Some(g);
        st.score = iou(&bbox, &g).clamp(0.0, 1.0);
        Ok((bbox, st.score))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Channels;

    fn track(n: u64) -> Vec<Annotation> {
        (0..n)
            .map(|i| Annotation::ground_truth(i, BoundingBox::new(10.0 + i as f64 * 1.5, 20.0, 16.0, 12.0).unwrap()))
            .collect()
    }

    fn frame() -> Image {
        Image::filled(200, 100, Channels::Rgb, 0)
    }

    #[test]
    fn noiseless_detector_is_exact() {
        let gt = track(20);
        let mut d = SimulatedDetector::new(&gt, 0.0, 0.0, 0.0, 3).unwrap();
        for a in &gt {
            assert_eq!(d.detect(a.frame, &frame()).unwrap(), vec![(a.bbox, 1.0)]);
            assert_eq!(d.score_at(a.frame, &frame(), &a.bbox).unwrap(), 1.0);
        }
        assert_eq!(d.score_at(99, &frame(), &gt[0].bbox).unwrap(), 0.0);
    }

    #[test]
    fn always_missing_detector_never_reports_truth() {
        let gt = track(50);
        let mut d = SimulatedDetector::new(&gt, 1.0, 0.5, 2.0, 3).unwrap();
        for a in &gt {
            for (_, s) in d.detect(a.frame, &frame()).unwrap() {
                assert!(s <= FALSE_POSITIVE_MAX_SCORE);
            }
        }
    }

    #[test]
    fn detector_is_order_independent() {
        let gt = track(30);
        let mut a = SimulatedDetector::new(&gt, 0.3, 0.4, 2.0, 11).unwrap();
        let mut b = a.clone();
        let forward: Vec<_> = (0..30).map(|i| a.detect(i, &frame()).unwrap()).collect();
        let mut backward: Vec<_> = (0..30).rev().map(|i| b.detect(i, &frame()).unwrap()).collect();
        backward.reverse();
        assert_eq!(forward, backward);
    }

    #[test]
    fn detector_rates_are_roughly_right() {
        let gt: Vec<_> = (0..2000)
            .map(|i| Annotation::ground_truth(i, BoundingBox::new(60.0, 20.0, 64.0, 48.0).unwrap()))
            .collect();
        let mut d = SimulatedDetector::new(&gt, 0.3, 0.2, 2.0, 5).unwrap();
        let (mut hits, mut fps) = (0, 0);
        for a in &gt {
            for (b, s) in d.detect(a.frame, &frame()).unwrap() {
                assert!((0.0..=1.0).contains(&s));
                if iou(&b, &a.bbox) > 0.5 && s > FALSE_POSITIVE_MAX_SCORE {
                    hits += 1;
                } else {
                    fps += 1;
                }
            }
        }
        assert!((1300..1500).contains(&hits), "{hits}");
        assert!((300..520).contains(&fps), "{fps}");
    }

    #[test]
    fn noiseless_tracker_follows_truth() {
        let gt = track(25);
        let mut t = SimulatedTracker::new(&gt, 0.0, vec![], 1).unwrap();
        t.init(0, &frame(), gt[0].bbox).unwrap();
        for a in &gt[1..] {
            assert_eq!(t.update(a.frame, &frame()).unwrap(), (a.bbox, 1.0));
        }
    }

    #[test]
    fn loss_event_freezes_box_and_decays_score() {
        let gt = track(30);
        let mut t = SimulatedTracker::new(&gt, 0.0, vec![(10, 15)], 1).unwrap();
        t.init(0, &frame(), gt[0].bbox).unwrap();
        for i in 1..10 {
            t.update(i, &frame()).unwrap();
        }
        let mut last_score = 1.0;
        for i in 10..15 {
            let (b, s) = t.update(i, &frame()).unwrap();
            assert_eq!(b, gt[9].bbox);
            assert_eq!(s, last_score * 0.5);
            last_score = s;
        }
        // Afterwards it trails the target by the distance covered while frozen.
        let (b, _) = t.update(15, &frame()).unwrap();
        assert_eq!(b.y(), gt[15].bbox.y());
        assert!((b.x() - (gt[15].bbox.x() - 7.5)).abs() < 1e-9);
    }

    #[test]
    fn drift_accumulates() {
        let gt = track(200);
        let mut t = SimulatedTracker::new(&gt, 2.0, vec![], 9).unwrap();
        t.init(0, &frame(), gt[0].bbox).unwrap();
        let mut far = 0;
        for a in &gt[1..] {
            let (b, s) = t.update(a.frame, &frame()).unwrap();
            assert!((0.0..=1.0).contains(&s));
            if iou(&b, &a.bbox) < 0.5 {
                far += 1;
            }
        }
        assert!(far > 0);
    }

    #[test]
    fn update_before_init_fails() {
        let mut t = SimulatedTracker::new(&track(3), 0.0, vec![], 1).unwrap();
        assert!(matches!(t.update(1, &frame()), Err(Error::UpdateBeforeInit)));
        assert!(SimulatedTracker::new(&track(3), 0.0, vec![(4, 4)], 1).is_err());
        assert!(SimulatedDetector::new(&track(3), 1.5, 0.0, 0.0, 1).is_err());
    }
}
