use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skywatch_core::augment::{generate_detailed, generate_sample, sample_seed, AugmentConfig};
use skywatch_core::scenario::{drone_assets, sky_background};

#[test]
fn batch_annotations_stay_in_frame() {
    let cfg = AugmentConfig::default();
    let assets = drone_assets(4, 2);
    let bgs = [sky_background(160, 120, 1), sky_background(200, 90, 2)];
    for i in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(77, i));
        let bg = &bgs[(i % 2) as usize];
        let s = generate_detailed(&mut rng, bg, &assets, &cfg).unwrap();
        let b = s.annotation.bbox;
        assert!(b.w() > 0.0 && b.h() > 0.0);
        assert!(b.x() >= 0.0 && b.y() >= 0.0);
        assert!(b.right() <= bg.width() as f64 && b.bottom() <= bg.height() as f64);
        assert!(s.placement.scale_ratio > 0.1 && s.placement.scale_ratio < 0.5);
        assert!(s.placement.rotation_deg > -30.0 && s.placement.rotation_deg < 30.0);
        assert_eq!(s.image.dims(), bg.dims());
    }
}

#[test]
fn same_seed_same_sample() {
    let cfg = AugmentConfig::default();
    let assets = drone_assets(3, 9);
    let bg = sky_background(128, 96, 5);
    for i in 0..20 {
        let a = generate_sample(&mut ChaCha8Rng::seed_from_u64(i), &bg, &assets, &cfg).unwrap();
        let b = generate_sample(&mut ChaCha8Rng::seed_from_u64(i), &bg, &assets, &cfg).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn config_file_defaults_and_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let ok = dir.path().join("ok.json");
    std::fs::write(&ok, r#"{"seed": 3, "p_grayscale": 1.0}"#).unwrap();
    let cfg = AugmentConfig::from_json_file(&ok).unwrap();
    assert_eq!(cfg.seed, 3);
    assert_eq!(cfg.scale_range, AugmentConfig::default().scale_range);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"p_grayscale": 1.5}"#).unwrap();
    assert!(AugmentConfig::from_json_file(&bad).is_err());
    std::fs::write(&bad, r#"{"scale_range": [0.5, 0.1]}"#).unwrap();
    assert!(AugmentConfig::from_json_file(&bad).is_err());
}
