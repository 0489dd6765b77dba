//! Detection and tracking fusion: sigmoid calibration of raw scores,
//! max/argmax selection over candidate boxes with rejection, and the
//! monitoring loop that periodically re-initialises the tracker from the
//! detector.

mod monitor;
mod sim;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use monitor::{monitor_step, run_detector_only, run_monitor, run_tracker_only, Mode, TrackState};
pub use sim::{SimulatedDetector, SimulatedTracker};

use crate::error::{Error, Result};
use crate::imaging::{BoundingBox, Image};

/// `1 / (1 + exp(-beta * (s - alpha)))`, evaluated without overflow.
///
/// Strictly increasing in `s` until it saturates at the ends of the `f64`
/// range.
pub fn calibrate(s: f64, beta: f64, alpha: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::BadParams(format!("beta must be positive, got {beta}")));
    }
    Ok(sigmoid(beta * (s - alpha)))
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Sigmoid parameters of the detector (`beta1`, `alpha1`) and tracker
/// (`beta2`, `alpha2`) channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    pub beta1: f64,
    pub alpha1: f64,
    pub beta2: f64,
    pub alpha2: f64,
}

impl Default for CalibrationParams {
    fn default() -> Self {
        Self {
            beta1: 10.0,
            alpha1: 0.5,
            beta2: 10.0,
            alpha2: 0.5,
        }
    }
}

impl CalibrationParams {
    pub fn validate(&self) -> Result<()> {
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::BadParams(format!("{name} must be positive, got {b}")));
            }
        }
        for (name, a) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !a.is_finite() {
                return Err(Error::BadParams(format!("{name} must be finite, got {a}")));
            }
        }
        Ok(())
    }

    pub fn detector(&self, s: f64) -> f64 {
        sigmoid(self.beta1 * (s - self.alpha1))
    }

    pub fn tracker(&self, s: f64) -> f64 {
        sigmoid(self.beta2 * (s - self.alpha2))
    }
}

/// Which model produced the winning calibrated score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Detector,
    Tracker,
}

/// A box with raw scores from one or both channels. A missing channel is
/// absent from the max, not scored as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    bbox: BoundingBox,
    s_d: Option<f64>,
    s_t: Option<f64>,
}

impl Candidate {
    pub fn new(bbox: BoundingBox, s_d: Option<f64>, s_t: Option<f64>) -> Result<Self> {
        if s_d.is_none() && s_t.is_none() {
            return Err(Error::BadParams("candidate needs a detector or tracker score".into()));
        }
        if s_d.into_iter().chain(s_t).any(|s| !s.is_finite()) {
            return Err(Error::BadParams("candidate scores must be finite".into()));
        }
        Ok(Self { bbox, s_d, s_t })
    }

    pub fn detection(bbox: BoundingBox, s_d: f64) -> Result<Self> {
        Self::new(bbox, Some(s_d), None)
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn s_d(&self) -> Option<f64> {
        self.s_d
    }

    pub fn s_t(&self) -> Option<f64> {
        self.s_t
    }

    /// Best calibrated channel score. The detector wins exact ties.
    pub fn score(&self, params: &CalibrationParams) -> (f64, Channel) {
        let d = self.s_d.map(|s| params.detector(s));
        let t = self.s_t.map(|s| params.tracker(s));
        match (d, t) {
            (Some(d), Some(t)) if t > d => (t, Channel::Tracker),
            (Some(d), _) => (d, Channel::Detector),
            (None, Some(t)) => (t, Channel::Tracker),
            (None, None) => unreachable!("candidate without scores"),
        }
    }
}

/// The accepted candidate of one fusion step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionResult {
    pub bbox: BoundingBox,
    pub s_fused: f64,
    pub channel: Channel,
    pub index: usize,
}

/// Index of the first maximum; `None` for an empty slice.
pub fn select(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

/// Picks the candidate with the highest calibrated score, lowest index on
/// ties. Returns `None` (rejection) for an empty list or when the best
/// score does not exceed `reject_epsilon`.
pub fn fuse(cands: &[Candidate], params: &CalibrationParams, reject_epsilon: f64) -> Option<FusionResult> {
    let scored: Vec<(f64, Channel)> = cands.iter().map(|c| c.score(params)).collect();
    let scores: Vec<f64> = scored.iter().map(|s| s.0).collect();
    let index = select(&scores)?;
    let (s_fused, channel) = scored[index];
    if s_fused <= reject_epsilon {
        return None;
    }
    Some(FusionResult {
        bbox: cands[index].bbox,
        s_fused,
        channel,
        index,
    })
}

/// Per-frame object detector. Implementations see every frame at most
/// once per call site and are never called concurrently.
pub trait Detector {
    fn detect(&mut self, frame_idx: u64, frame: &Image) -> Result<Vec<(BoundingBox, f64)>>;

    /// Raw confidence that `bbox` holds the target.
    fn score_at(&mut self, frame_idx: u64, frame: &Image, bbox: &BoundingBox) -> Result<f64>;
}

/// Single-target tracker.
pub trait Tracker {
    fn init(&mut self, frame_idx: u64, frame: &Image, bbox: BoundingBox) -> Result<()>;

    /// Fails with [`Error::UpdateBeforeInit`] if never initialised.
    fn update(&mut self, frame_idx: u64, frame: &Image) -> Result<(BoundingBox, f64)>;
}

/// Monitoring loop knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    /// Frames with `frame_idx % detect_every_n == 0` run the full detector.
    pub detect_every_n: u32,
    /// Raw detector score needed to (re-)initialise the tracker.
    pub reinit_threshold: f64,
    /// Calibrated scores at or below this are rejected.
    pub reject_epsilon: f64,
    /// Consecutive rejections before falling back to searching.
    pub lost_patience: u32,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            detect_every_n: 10,
            reinit_threshold: 0.5,
            reject_epsilon: 0.05,
            lost_patience: 30,
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.detect_every_n == 0 {
            return Err(Error::InvalidConfig("detect_every_n must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.reject_epsilon) {
            return Err(Error::InvalidConfig(format!(
                "reject_epsilon {} must be in [0, 1)",
                self.reject_epsilon
            )));
        }
        if !self.reinit_threshold.is_finite() {
            return Err(Error::InvalidConfig("reinit_threshold must be finite".into()));
        }
        Ok(())
    }
}

/// Flat JSON form of [`CalibrationParams`] plus [`MonitorConfig`]. Missing
/// fields take their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorSettings {
    pub beta1: f64,
    pub alpha1: f64,
    pub beta2: f64,
    pub alpha2: f64,
    pub detect_every_n: u32,
    pub reinit_threshold: f64,
    pub reject_epsilon: f64,
    pub lost_patience: u32,
}

impl Default for MonitorSettings {
    fn default() -> Self {
        Self::from_parts(CalibrationParams::default(), MonitorConfig::default())
    }
}

impl MonitorSettings {
    pub fn from_parts(p: CalibrationParams, c: MonitorConfig) -> Self {
        Self {
            beta1: p.beta1,
            alpha1: p.alpha1,
            beta2: p.beta2,
            alpha2: p.alpha2,
            detect_every_n: c.detect_every_n,
            reinit_threshold: c.reinit_threshold,
            reject_epsilon: c.reject_epsilon,
            lost_patience: c.lost_patience,
        }
    }

    pub fn calibration(&self) -> CalibrationParams {
        CalibrationParams {
            beta1: self.beta1,
            alpha1: self.alpha1,
            beta2: self.beta2,
            alpha2: self.alpha2,
        }
    }

    pub fn monitor(&self) -> MonitorConfig {
        MonitorConfig {
            detect_every_n: self.detect_every_n,
            reinit_threshold: self.reinit_threshold,
            reject_epsilon: self.reject_epsilon,
            lost_patience: self.lost_patience,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.calibration()
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        self.monitor().validate()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let s: Self = serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        s.validate()?;
        Ok(s)
    }
}
