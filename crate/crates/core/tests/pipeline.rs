use ma_lab::array::{ArrayGeometry, SensingScene, SpatialAngles};
use ma_lab::bench::{emit, generate_baseline, run_scenario, Extent, ScenarioConfig, Scheme};
use ma_lab::estimation::{decompose, monte_carlo_mse, music, synthesize, MusicOptions};
use ma_lab::placement1d::{optimal_apv_1d, Segment1D};
use ma_lab::region::Region;

#[test]
fn high_snr_music_recovers_the_angle() {
    let scene = SensingScene::with_snr_db(SpatialAngles::new(-0.2, 0.45).unwrap(), 40.0, 0.5).unwrap();
    let g = generate_baseline(Scheme::Upah, 16, &Extent::Region(Region::square_centered(3.0).unwrap()), 0.5).unwrap();
    let block = synthesize(&scene, &g, 4).unwrap();
    let d = decompose(&block);
    assert_eq!(d.noise.ncols(), 15);
    assert!(d.separation_db() > 20.0);
    let s = music(&block, &MusicOptions::default()).unwrap();
    assert!((s.estimate.0 + 0.2).abs() < 5e-3, "{:?}", s.estimate);
    assert!((s.estimate.1 - 0.45).abs() < 5e-3, "{:?}", s.estimate);
}

#[test]
fn monte_carlo_depends_only_on_seed() {
    let scene = SensingScene::with_snr_db(SpatialAngles::from_u(0.3).unwrap(), 10.0, 0.5).unwrap();
    let g: ArrayGeometry = optimal_apv_1d(&Segment1D::new(6.0, 0.5, 8).unwrap()).unwrap().into();
    let opts = MusicOptions::default();
    let a = monte_carlo_mse(&scene, &g, 25, 17, &opts).unwrap();
    let b = monte_carlo_mse(&scene, &g, 25, 17, &opts).unwrap();
    let c = monte_carlo_mse(&scene, &g, 25, 18, &opts).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.estimates_u, c.estimates_u);
    assert!(a.estimates_v.is_none());
    assert!(monte_carlo_mse(&scene, &g, 0, 1, &opts).is_err());
}

#[test]
fn planar_sweep_prefers_optimized_layout() {
    let cfg = ScenarioConfig::from_toml(
        r#"
        trials = 0
        schemes = ["sca-2d", "upah", "upaf"]
        [scene]
        antennas = 8
        snr_db = 15
        min_spacing = 0.5
        u = 0.35
        v = 0.71
        [region]
        shape = "square"
        min = [-2.5, -2.5]
        side = 5
        [sweep]
        axis = "antennas"
        values = [8, 9, 12]
        "#,
    )
    .unwrap();
    let rows = run_scenario(&cfg).unwrap();
    for chunk in rows.chunks(3) {
        let mm = |i: usize| chunk[i].crb_u.unwrap().max(chunk[i].crb_v.unwrap());
        assert_eq!(chunk[0].scheme, Scheme::Sca2d);
        assert!(mm(0) < mm(1) && mm(0) < mm(2), "N={}: {} {} {}", chunk[0].sweep, mm(0), mm(1), mm(2));
    }
    let dir = tempfile::tempdir().unwrap();
    emit(&rows, &dir.path().join("r.csv")).unwrap();
    assert!(emit(&[], &dir.path().join("e.csv")).is_err());
}
