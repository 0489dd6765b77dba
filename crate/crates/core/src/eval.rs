//! Tracking and detection metrics: IoU, success-rate curves with their
//! AUC, and single-class precision-recall curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Annotation, BoundingBox};

/// Intersection over union, in `[0, 1]`.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = a.right().min(b.right()) - a.x().max(b.x());
    let ih = a.bottom().min(b.bottom()) - a.y().max(b.y());
    if iw <= 0.0 || ih <= 0.0 {
        return 0.0;
    }
    let inter = iw * ih;
    // Areas from edges so that iou(a, a) is exactly 1.
    let area_a = (a.right() - a.x()) * (a.bottom() - a.y());
    let area_b = (b.right() - b.x()) * (b.bottom() - b.y());
    (inter / (area_a + area_b - inter)).clamp(0.0, 1.0)
}

/// Thresholds `0.00, 0.01, ..., 1.00`.
pub fn default_thresholds() -> Vec<f64> {
    (0..=100).map(|k| k as f64 / 100.0).collect()
}

/// Fraction of frames whose IoU is strictly above each threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    pub thresholds: Vec<f64>,
    pub success_rate: Vec<f64>,
}

/// Success curve of `pred` against `gt`. Frames without a prediction fail
/// at every threshold. An empty sequence gives an all-zero curve.
pub fn success_curve(pred: &[Option<BoundingBox>], gt: &[BoundingBox], thresholds: &[f64]) -> Result<SuccessCurve> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch(pred.len(), gt.len()));
    }
    let ious: Vec<Option<f64>> = pred.iter().zip(gt).map(|(p, g)| p.as_ref().map(|p| iou(p, g))).collect();
    let n = ious.len();
    let success_rate = thresholds
        .iter()
        .map(|&t| {
            if n == 0 {
                return 0.0;
            }
            ious.iter().filter(|v| v.is_some_and(|v| v > t)).count() as f64 / n as f64
        })
        .collect();
    Ok(SuccessCurve {
        thresholds: thresholds.to_vec(),
        success_rate,
    })
}

/// Trapezoidal area under a success curve.
pub fn auc(curve: &SuccessCurve) -> f64 {
    curve
        .thresholds
        .windows(2)
        .zip(curve.success_rate.windows(2))
        .map(|(t, s)| (t[1] - t[0]) * (s[0] + s[1]) / 2.0)
        .sum()
}

/// Success curve of per-frame annotations against per-frame ground truth,
/// on the frames that have ground truth. At most one prediction per frame
/// is used (the first one seen).
pub fn track_success(pred: &[Annotation], gt: &[Annotation], thresholds: &[f64]) -> Result<SuccessCurve> {
    let mut by_frame = std::collections::HashMap::new();
    for p in pred {
        by_frame.entry(p.frame).or_insert(p.bbox);
    }
    let preds: Vec<Option<BoundingBox>> = gt.iter().map(|g| by_frame.get(&g.frame).copied()).collect();
    let gts: Vec<BoundingBox> = gt.iter().map(|g| g.bbox).collect();
    success_curve(&preds, &gts, thresholds)
}

/// One point of a precision-recall sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

/// Points ordered by descending score threshold.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PRCurve {
    pub points: Vec<PrPoint>,
}

/// Single-class precision-recall sweep with greedy one-to-one matching.
///
/// Detections are visited by descending score (stable for equal scores).
/// Each is a true positive if some still unmatched ground-truth box of the
/// same frame has IoU above `iou_thresh`; the best such box is consumed.
pub fn precision_recall(dets: &[Annotation], gt: &[Annotation], iou_thresh: f64) -> Result<PRCurve> {
    let mut scored = Vec::with_capacity(dets.len());
    for d in dets {
        let s = d.score.ok_or(Error::MissingScore(d.frame))?;
        scored.push((s, d));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut matched = vec![false; gt.len()];
    let total = gt.len() as f64;
    let mut tp = 0usize;
    let mut points = Vec::with_capacity(scored.len());
    for (rank, (_, d)) in scored.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (j, g) in gt.iter().enumerate() {
            if matched[j] || g.frame != d.frame {
                continue;
            }
            let v = iou(&d.bbox, &g.bbox);
            if v > iou_thresh && best.is_none_or(|(_, b)| v > b) {
                best = Some((j, v));
            }
        }
        if let Some((j, _)) = best {
            matched[j] = true;
            tp += 1;
        }
        points.push(PrPoint {
            recall: if total > 0.0 { tp as f64 / total } else { 0.0 },
            precision: tp as f64 / (rank + 1) as f64,
        });
    }
    Ok(PRCurve { points })
}

/// Trapezoidal area over recall, after prepending `(0, p0)` where `p0` is
/// the first precision.
pub fn pr_auc(curve: &PRCurve) -> f64 {
    let Some(first) = curve.points.first() else {
        return 0.0;
    };
    let head = PrPoint {
        recall: 0.0,
        precision: first.precision,
    };
    std::iter::once(&head)
        .chain(&curve.points)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| (w[1].recall - w[0].recall) * (w[0].precision + w[1].precision) / 2.0)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(x: f64, y: f64, w: f64, h: f64) -> BoundingBox {
        BoundingBox::new(x, y, w, h).unwrap()
    }

    fn ann(frame: u64, bbox: BoundingBox, score: Option<f64>) -> Annotation {
        Annotation::new(frame, bbox, score, "drone").unwrap()
    }

    /// Cells of a `step`-spaced grid whose centres fall in `[lo, hi)`.
    fn cells(lo: f64, hi: f64, step: f64) -> u64 {
        let first = (lo / step - 0.5).ceil() as i64;
        let mut n = 0;
        let mut k = first;
        while (k as f64 + 0.5) * step < hi {
            if (k as f64 + 0.5) * step >= lo {
                n += 1;
            }
            k += 1;
        }
        n
    }

    /// Rasterization oracle: covered grid cells, counted per axis since
    /// boxes are axis-aligned.
    fn raster_iou(a: &BoundingBox, c: &BoundingBox, step: f64) -> f64 {
        let count = |x0: f64, y0: f64, x1: f64, y1: f64| {
            if x1 <= x0 || y1 <= y0 {
                0
            } else {
                cells(x0, x1, step) * cells(y0, y1, step)
            }
        };
        let ca = count(a.x(), a.y(), a.right(), a.bottom());
        let cc = count(c.x(), c.y(), c.right(), c.bottom());
        let ci = count(a.x().max(c.x()), a.y().max(c.y()), a.right().min(c.right()), a.bottom().min(c.bottom()));
        ci as f64 / (ca + cc - ci) as f64
    }

    #[test]
    fn iou_examples() {
        let a = b(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &b(20.0, 0.0, 5.0, 5.0)), 0.0);
        assert_eq!(iou(&a, &b(10.0, 0.0, 5.0, 5.0)), 0.0);
        let half = iou(&a, &b(5.0, 0.0, 10.0, 10.0));
        assert!((half - 1.0 / 3.0).abs() < 1e-15);
        assert!((raster_iou(&a, &b(5.0, 0.0, 10.0, 10.0), 0.01) - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn iou_matches_raster_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let mut rb = || {
                b(
                    rng.random_range(0.0..30.0),
                    rng.random_range(0.0..30.0),
                    rng.random_range(1.0..30.0),
                    rng.random_range(1.0..30.0),
                )
            };
            let (p, q) = (rb(), rb());
            assert!((iou(&p, &q) - raster_iou(&p, &q, 0.001)).abs() < 1e-3);
        }
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_self(x in -50.0..50.0f64, y in -50.0..50.0f64, w in 0.1..40.0f64, h in 0.1..40.0f64,
                                  x2 in -50.0..50.0f64, y2 in -50.0..50.0f64, w2 in 0.1..40.0f64, h2 in 0.1..40.0f64) {
            let p = b(x, y, w, h);
            let q = b(x2, y2, w2, h2);
            prop_assert_eq!(iou(&p, &q), iou(&q, &p));
            prop_assert_eq!(iou(&p, &p), 1.0);
            let v = iou(&p, &q);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn iou_monotone_when_moving_away(w in 1.0..20.0f64, h in 1.0..20.0f64, d1 in 0.0..30.0f64, step in 0.0..10.0f64) {
            let a = b(0.0, 0.0, w, h);
            let near = iou(&a, &b(d1, 0.0, w, h));
            let far = iou(&a, &b(d1 + step, 0.0, w, h));
            prop_assert!(far <= near);
        }

        #[test]
        fn success_curve_non_increasing(seeds in proptest::collection::vec((0.0..20.0f64, 0.0..20.0f64, proptest::bool::ANY), 1..20)) {
            let gt: Vec<_> = seeds.iter().map(|_| b(5.0, 5.0, 10.0, 10.0)).collect();
            let pred: Vec<_> = seeds.iter().map(|&(x, y, keep)| keep.then(|| b(x, y, 10.0, 10.0))).collect();
            let c = success_curve(&pred, &gt, &default_thresholds()).unwrap();
            for w in c.success_rate.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
        }

        #[test]
        fn auc_of_constant_curve(c in 0.0..=1.0f64) {
            let curve = SuccessCurve { thresholds: default_thresholds(), success_rate: vec![c; 101] };
            prop_assert!((auc(&curve) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn success_curve_examples() {
        let g = vec![b(0.0, 0.0, 10.0, 10.0); 3];
        let exact: Vec<_> = g.iter().copied().map(Some).collect();
        let c = success_curve(&exact, &g, &default_thresholds()).unwrap();
        assert!(c.success_rate[..100].iter().all(|&v| v == 1.0));
        assert_eq!(c.success_rate[100], 0.0);
        assert!((auc(&c) - 0.995).abs() < 1e-12);

        let none = success_curve(&[None, None, None], &g, &default_thresholds()).unwrap();
        assert!(none.success_rate.iter().all(|&v| v == 0.0));

        // Overlap 50 / union 100.
        let half = success_curve(&[Some(b(0.0, 0.0, 10.0, 5.0))], &g[..1], &default_thresholds()).unwrap();
        assert!(half.success_rate[..50].iter().all(|&v| v == 1.0));
        assert!(half.success_rate[50..].iter().all(|&v| v == 0.0));
        assert!((auc(&half) - 0.495).abs() < 1e-12);

        assert!(matches!(
            success_curve(&[None], &g, &default_thresholds()),
            Err(Error::LengthMismatch(1, 3))
        ));
    }

    #[test]
    fn track_success_aligns_by_frame() {
        let gt = vec![ann(0, b(0.0, 0.0, 4.0, 4.0), None), ann(1, b(1.0, 0.0, 4.0, 4.0), None)];
        let pred = vec![ann(1, b(1.0, 0.0, 4.0, 4.0), Some(0.9))];
        let c = track_success(&pred, &gt, &default_thresholds()).unwrap();
        assert_eq!(c.success_rate[0], 0.5);
    }

    #[test]
    fn pr_perfect_and_empty() {
        let gt = vec![ann(0, b(0.0, 0.0, 5.0, 5.0), None), ann(1, b(2.0, 2.0, 5.0, 5.0), None)];
        let dets: Vec<_> = gt.iter().map(|g| ann(g.frame, g.bbox, Some(1.0))).collect();
        let c = precision_recall(&dets, &gt, 0.5).unwrap();
        let last = c.points.last().unwrap();
        assert_eq!((last.recall, last.precision), (1.0, 1.0));
        assert_eq!(pr_auc(&c), 1.0);

        let single = precision_recall(&dets[..1], &gt[..1], 0.5).unwrap();
        assert_eq!(single.points, vec![PrPoint { recall: 1.0, precision: 1.0 }]);

        let empty = precision_recall(&[], &gt, 0.5).unwrap();
        assert!(empty.points.is_empty());
        assert_eq!(pr_auc(&empty), 0.0);
    }

    #[test]
    fn pr_hand_sweep() {
        let gt = vec![ann(0, b(0.0, 0.0, 10.0, 10.0), None), ann(1, b(0.0, 0.0, 10.0, 10.0), None)];
        let dets = vec![
            ann(0, b(0.0, 0.0, 10.0, 10.0), Some(0.9)),
            ann(0, b(50.0, 50.0, 10.0, 10.0), Some(0.8)),
            ann(1, b(1.0, 0.0, 10.0, 10.0), Some(0.7)),
        ];
        let c = precision_recall(&dets, &gt, 0.5).unwrap();
        let pts: Vec<(f64, f64)> = c.points.iter().map(|p| (p.recall, p.precision)).collect();
        assert_eq!(pts[0], (0.5, 1.0));
        assert_eq!(pts[1], (0.5, 0.5));
        assert_eq!(pts[2].0, 1.0);
        assert!((pts[2].1 - 2.0 / 3.0).abs() < 1e-15);
        // Head (0,1)-(0.5,1) contributes 0.5; (0.5,0.5)-(1,2/3) contributes 0.5 * (0.5 + 2/3) / 2.
        let want = 0.5 + 0.5 * (0.5 + 2.0 / 3.0) / 2.0;
        assert!((pr_auc(&c) - want).abs() < 1e-12);
    }

    #[test]
    fn pr_each_gt_matched_once() {
        let gt = vec![ann(0, b(0.0, 0.0, 10.0, 10.0), None)];
        let dets = vec![ann(0, b(0.0, 0.0, 10.0, 10.0), Some(0.9)), ann(0, b(0.0, 0.0, 10.0, 10.0), Some(0.8))];
        let c = precision_recall(&dets, &gt, 0.5).unwrap();
        assert_eq!(c.points[1], PrPoint { recall: 1.0, precision: 0.5 });
    }

    #[test]
    fn pr_requires_scores() {
        let gt = vec![ann(4, b(0.0, 0.0, 1.0, 1.0), None)];
        assert!(matches!(precision_recall(&gt, &gt, 0.5), Err(Error::MissingScore(4))));
    }
}
