//! Drone-monitoring toolkit: synthetic data augmentation with automatic
//! box labels, residual-frame preprocessing, detection/tracking fusion,
//! adversarial-augmentation loss numerics and evaluation metrics.

pub mod augment;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod imaging;
pub mod residual;
pub mod scenario;
pub mod thermal;

pub use augment::{generate_sample, AugmentConfig, ForegroundAsset, PlacementParams};
pub use error::{Error, Result};
pub use eval::{auc, iou, precision_recall, pr_auc, success_curve, PRCurve, SuccessCurve};
pub use fusion::{
    calibrate, fuse, run_monitor, CalibrationParams, Candidate, Detector, FusionResult, MonitorConfig,
    MonitorSettings, TrackState, Tracker,
};
pub use imaging::{clamp_box, to_grayscale, Annotation, BoundingBox, Channels, Image};
pub use residual::{residual_frame, residual_sequence, FrameSequence, Shift};
pub use thermal::{LossWeights, Tensor};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
