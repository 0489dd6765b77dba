use skywatch_core::eval::{auc, default_thresholds, success_curve, track_success};
use skywatch_core::fusion::{
    run_detector_only, run_monitor, run_tracker_only, CalibrationParams, MonitorConfig, SimulatedDetector,
    SimulatedTracker,
};
use skywatch_core::scenario::{scenario, ScenarioConfig};

fn short() -> ScenarioConfig {
    ScenarioConfig {
        frames: 120,
        ..Default::default()
    }
}

#[test]
fn noiseless_models_reproduce_ground_truth() {
    let s = scenario(3, &short()).unwrap();
    let gt = &s.trajectory.ground_truth;
    let mut det = SimulatedDetector::new(gt, 0.0, 0.0, 0.0, 1).unwrap();
    let mut trk = SimulatedTracker::new(gt, 0.0, vec![], 1).unwrap();
    let out = run_monitor(&s.frames, &mut det, &mut trk, &CalibrationParams::default(), &MonitorConfig::default())
        .unwrap();
    assert_eq!(out.len(), gt.len());
    for (o, g) in out.iter().zip(gt) {
        assert_eq!((o.frame, o.bbox), (g.frame, g.bbox));
    }
    let pred: Vec<_> = out.iter().map(|a| Some(a.bbox)).collect();
    let boxes: Vec<_> = gt.iter().map(|a| a.bbox).collect();
    let c = success_curve(&pred, &boxes, &default_thresholds()).unwrap();
    assert!((auc(&c) - 0.995).abs() < 1e-12);
}

#[test]
fn closed_loop_is_deterministic_and_in_frame() {
    let cfg = short();
    let s = scenario(8, &cfg).unwrap();
    let gt = &s.trajectory.ground_truth;
    let run = || {
        let mut det = SimulatedDetector::new(gt, 0.3, 0.2, 2.0, 8).unwrap();
        let mut trk = SimulatedTracker::new(gt, 2.0, vec![s.trajectory.loss_event], 8).unwrap();
        run_monitor(&s.frames, &mut det, &mut trk, &CalibrationParams::default(), &MonitorConfig::default()).unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    let mut frames: Vec<u64> = a.iter().map(|x| x.frame).collect();
    frames.dedup();
    assert_eq!(frames.len(), a.len());
    for x in &a {
        let b = x.bbox;
        assert!(b.x() >= 0.0 && b.y() >= 0.0 && b.right() <= cfg.width as f64 && b.bottom() <= cfg.height as f64);
        assert!(x.score.is_some_and(|s| s > 0.0 && s < 1.0));
    }
}

#[test]
fn fusion_beats_either_model_on_a_few_seeds() {
    let p = CalibrationParams::default();
    let m = MonitorConfig::default();
    for seed in 0..4 {
        let s = scenario(seed, &ScenarioConfig::default()).unwrap();
        let gt = &s.trajectory.ground_truth;
        let det = || SimulatedDetector::new(gt, 0.3, 0.2, 2.0, seed).unwrap();
        let trk = || SimulatedTracker::new(gt, 2.0, vec![s.trajectory.loss_event], seed).unwrap();
        let score = |pred: &[_]| auc(&track_success(pred, gt, &default_thresholds()).unwrap());
        let fused = score(&run_monitor(&s.frames, &mut det(), &mut trk(), &p, &m).unwrap());
        let det_only = score(&run_detector_only(&s.frames, &mut det(), &p, m.reject_epsilon).unwrap());
        let trk_only = score(&run_tracker_only(&s.frames, &mut trk(), &gt[0], &p).unwrap());
        assert!(fused > det_only && fused > trk_only, "seed {seed}: {fused} {det_only} {trk_only}");
    }
}
