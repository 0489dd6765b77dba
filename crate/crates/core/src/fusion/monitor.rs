use serde::{Deserialize, Serialize};

use super::{fuse, CalibrationParams, Candidate, Channel, Detector, MonitorConfig, Tracker};
use crate::error::{Error, Result};
use crate::imaging::{clamp_box, Annotation, BoundingBox, Image};
use crate::residual::FrameSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// No target: the detector runs on every frame.
    Searching,
    /// Tracker output accepted on the last frame.
    Tracking,
    /// Tracker still running but its recent outputs were rejected.
    Lost,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackState {
    pub mode: Mode,
    pub current_box: Option<BoundingBox>,
    /// Consecutive frames without an accepted box.
    pub frames_since_confident: u32,
}

impl Default for TrackState {
    fn default() -> Self {
        Self {
            mode: Mode::Searching,
            current_box: None,
            frames_since_confident: 0,
        }
    }
}

fn annotate(frame_idx: u64, bbox: BoundingBox, score: f64, frame: &Image) -> Result<Option<Annotation>> {
    match clamp_box(&bbox, frame.width(), frame.height()) {
        Ok(b) => Ok(Some(Annotation::new(frame_idx, b, Some(score.clamp(0.0, 1.0)), "drone")?)),
        Err(Error::EmptyBox) => Ok(None),
        Err(e) => Err(e),
    }
}

fn best_detection(dets: &[(BoundingBox, f64)]) -> Option<(BoundingBox, f64)> {
    let mut best: Option<(BoundingBox, f64)> = None;
    for &(b, s) in dets {
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((b, s));
        }
    }
    best
}

/// Advances the monitoring state machine by one frame.
///
/// * Searching: the detector runs; a detection above `reinit_threshold`
///   initialises the tracker and is emitted.
/// * Tracking or Lost, ordinary frame: the tracker box is scored by both
///   channels and fused as a single candidate.
/// * Tracking or Lost, every `detect_every_n`-th frame: detections and the
///   tracker box compete; a winning detection above `reinit_threshold`
///   re-initialises the tracker.
///
/// A rejected frame emits nothing and moves to Lost; `lost_patience`
/// consecutive rejections fall back to Searching. Emitted boxes are clipped
/// to the frame and carry the fused calibrated score.
#[allow(clippy::too_many_arguments)]
pub fn monitor_step(
    state: TrackState,
    frame_idx: u64,
    frame: &Image,
    det: &mut dyn Detector,
    trk: &mut dyn Tracker,
    params: &CalibrationParams,
    cfg: &MonitorConfig,
) -> Result<(TrackState, Option<Annotation>)> {
    if state.mode == Mode::Searching {
        let dets = det.detect(frame_idx, frame)?;
        if let Some((bbox, s)) = best_detection(&dets).filter(|d| d.1 > cfg.reinit_threshold) {
            trk.init(frame_idx, frame, bbox)?;
            let out = annotate(frame_idx, bbox, params.detector(s), frame)?;
            let next = TrackState {
                mode: Mode::Tracking,
                current_box: Some(bbox),
                frames_since_confident: 0,
            };
            return Ok((next, out));
        }
        return Ok((state, None));
    }

    let (tbox, s_t) = trk.update(frame_idx, frame)?;
    let s_d = det.score_at(frame_idx, frame, &tbox)?;
    let tracked = Candidate::new(tbox, Some(s_d), Some(s_t))?;

    let redetect = frame_idx.is_multiple_of(cfg.detect_every_n as u64);
    let (cands, raw_det) = if redetect {
        let dets = det.detect(frame_idx, frame)?;
        let mut cands = Vec::with_capacity(dets.len() + 1);
        for &(b, s) in &dets {
            cands.push(Candidate::detection(b, s)?);
        }
        cands.push(tracked);
        let raw: Vec<f64> = dets.iter().map(|d| d.1).collect();
        (cands, raw)
    } else {
        (vec![tracked], vec![])
    };

    let accepted = fuse(&cands, params, cfg.reject_epsilon);
    let emitted = match accepted {
        Some(r) => annotate(frame_idx, r.bbox, r.s_fused, frame)?,
        None => None,
    };
    let Some(r) = accepted.filter(|_| emitted.is_some()) else {
        let missed = state.frames_since_confident + 1;
        let next = if missed >= cfg.lost_patience {
            TrackState {
                mode: Mode::Searching,
                current_box: None,
                frames_since_confident: missed,
            }
        } else {
            TrackState {
                mode: Mode::Lost,
                current_box: Some(tbox),
                frames_since_confident: missed,
            }
        };
        return Ok((next, None));
    };

    if r.index < raw_det.len() && r.channel == Channel::Detector && raw_det[r.index] > cfg.reinit_threshold {
        trk.init(frame_idx, frame, r.bbox)?;
    }
    let next = TrackState {
        mode: Mode::Tracking,
        current_box: Some(r.bbox),
        frames_since_confident: 0,
    };
    Ok((next, emitted))
}

/// Runs [`monitor_step`] over the whole sequence, starting in Searching.
pub fn run_monitor(
    seq: &FrameSequence,
    det: &mut dyn Detector,
    trk: &mut dyn Tracker,
    params: &CalibrationParams,
    cfg: &MonitorConfig,
) -> Result<Vec<Annotation>> {
    params.validate()?;
    cfg.validate()?;
    let mut state = TrackState::default();
    let mut out = Vec::new();
    for (i, frame) in seq.frames().iter().enumerate() {
        let (next, ann) = monitor_step(state, i as u64, frame, det, trk, params, cfg)?;
        state = next;
        out.extend(ann);
    }
    Ok(out)
}

/// Detector alone on every frame: its detections are fused and the best
/// accepted one emitted.
pub fn run_detector_only(
    seq: &FrameSequence,
    det: &mut dyn Detector,
    params: &CalibrationParams,
    reject_epsilon: f64,
) -> Result<Vec<Annotation>> {
    params.validate()?;
    let mut out = Vec::new();
    for (i, frame) in seq.frames().iter().enumerate() {
        let cands = det
            .detect(i as u64, frame)?
            .into_iter()
            .map(|(b, s)| Candidate::detection(b, s))
            .collect::<Result<Vec<_>>>()?;
        if let Some(r) = fuse(&cands, params, reject_epsilon) {
            out.extend(annotate(i as u64, r.bbox, r.s_fused, frame)?);
        }
    }
    Ok(out)
}

/// Tracker alone, initialised at `init` on frame `init.frame` and emitting
/// its box on every later frame with the calibrated tracker score.
pub fn run_tracker_only(
    seq: &FrameSequence,
    trk: &mut dyn Tracker,
    init: &Annotation,
    params: &CalibrationParams,
) -> Result<Vec<Annotation>> {
    params.validate()?;
    let start = init.frame as usize;
    let mut out = Vec::new();
    for (i, frame) in seq.frames().iter().enumerate().skip(start) {
        let i = i as u64;
        if i == init.frame {
            trk.init(i, frame, init.bbox)?;
            out.extend(annotate(i, init.bbox, params.tracker(1.0), frame)?);
            continue;
        }
        let (b, s) = trk.update(i, frame)?;
        out.extend(annotate(i, b, params.tracker(s), frame)?);
    }
    Ok(out)
}
