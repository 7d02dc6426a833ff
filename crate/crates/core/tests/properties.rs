mod common;

use std::f64::consts::PI;

use ma_lab::array::{steering_vector_2d, Geometry2D, PositionStats, SensingScene, SpatialAngles};
use ma_lab::conic::{solve, SolveStatus};
use ma_lab::crb::{crb_1d, crb_2d};
use ma_lab::placement1d::{adjustment_sweep, optimal_apv_1d, p_closed_form, Segment1D};
use ma_lab::placement2d::circular_optimal;
use ma_lab::region::Region;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn segment() -> impl Strategy<Value = Segment1D> {
    (2usize..24, 0.1f64..1.0, 0.0f64..30.0)
        .prop_map(|(n, d, extra)| Segment1D::new((n - 1) as f64 * d + extra, d, n).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn optimum_dominates_random_layouts(seg in segment(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let best = p_closed_form(&seg).unwrap();
        for _ in 0..20 {
            let g = common::random_layout(&mut rng, seg.length, seg.min_spacing, seg.antennas);
            prop_assert!(PositionStats::of_1d(&g).var_x <= best * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn adjustment_never_lowers_variance(seg in segment(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x0 = common::random_layout(&mut rng, seg.length, seg.min_spacing, seg.antennas);
        let steps = adjustment_sweep(&x0, &seg).unwrap();
        let mut prev = PositionStats::of_1d(&x0).var_x;
        for g in &steps {
            let v = PositionStats::of_1d(g).var_x;
            prop_assert!(v >= prev - 1e-12 * prev.max(1.0));
            prev = v;
        }
        prop_assert_eq!(steps.last().unwrap(), &optimal_apv_1d(&seg).unwrap());
    }

    #[test]
    fn crb_ignores_translation_and_swaps_with_axes(
        pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..12),
        dx in -10.0f64..10.0,
        dy in -10.0f64..10.0,
    ) {
        let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        let g = Geometry2D::from_points(&pts).unwrap();
        let scene = SensingScene::with_snr_db(SpatialAngles::new(0.3, 0.4).unwrap(), 10.0, 0.1).unwrap();
        let a = crb_2d(&scene, &g);
        prop_assume!(a.crb_u.is_finite() && a.crb_v.unwrap().is_finite());
        let b = crb_2d(&scene, &g.translated(dx, dy));
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-6 * x.abs().max(y.abs());
        prop_assert!(close(a.crb_u, b.crb_u));
        let s = crb_2d(&scene, &g.swapped_axes());
        prop_assert!(close(a.crb_u, s.crb_v.unwrap()));
        prop_assert!(close(a.crb_v.unwrap(), s.crb_u));
    }

    #[test]
    fn bound_scales_with_snr(snr in -10.0f64..40.0, seg in segment()) {
        let angles = SpatialAngles::from_u(0.2).unwrap();
        let lo = SensingScene::with_snr_db(angles, snr, seg.min_spacing).unwrap();
        let hi = SensingScene::with_snr_db(angles, snr + 10.0, seg.min_spacing).unwrap();
        let g = optimal_apv_1d(&seg).unwrap();
        let r = crb_1d(&lo, &g).crb_u / crb_1d(&hi, &g).crb_u;
        prop_assert!((r - 10.0).abs() < 1e-9);
    }

    #[test]
    fn circular_layout_is_isotropic(k in 1usize..8, radius in 0.5f64..5.0) {
        let n = 4 * k;
        let d = 2.0 * radius * (PI / n as f64).sin();
        let g = circular_optimal(n, radius, d).unwrap();
        let s = PositionStats::of_2d(&g);
        prop_assert!((s.var_x - radius * radius / 2.0).abs() < 1e-9 * radius * radius);
        prop_assert!((s.var_y - radius * radius / 2.0).abs() < 1e-9 * radius * radius);
        prop_assert!(s.cov_xy.abs() < 1e-9 * radius * radius);
        prop_assert!(g.min_pair_distance().0 >= d * (1.0 - 1e-9));
        for p in g.points() {
            prop_assert!((p[0].hypot(p[1]) - radius).abs() < 1e-9 * radius);
        }
    }

    #[test]
    fn steering_entries_have_unit_modulus(
        pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..10),
        u in -0.7f64..0.7,
        v in -0.7f64..0.7,
    ) {
        let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        let g = Geometry2D::from_points(&pts).unwrap();
        for a in steering_vector_2d(&g, u, v, 1.0).unwrap() {
            prop_assert!((a.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn region_circles_nest(
        pts in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 3..9)
    ) {
        // Convex hull of random points as a counter-clockwise polygon.
        let mut pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
        let mut hull: Vec<[f64; 2]> = Vec::new();
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
                if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
            for &p in iter {
                while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-9 {
                    hull.pop();
                }
                hull.push(p);
            }
            hull.pop();
        }
        let region = Region::polygon(hull.clone());
        prop_assume!(region.is_ok());
        let region = region.unwrap();
        let c = region.enclosing_circles().unwrap();
        for v in &hull {
            let r = (v[0] - c.circumscribed.center[0]).hypot(v[1] - c.circumscribed.center[1]);
            prop_assert!(r <= c.circumscribed.radius * (1.0 + 1e-9) + 1e-9);
        }
        for k in 0..16 {
            let t = 2.0 * PI * k as f64 / 16.0;
            let p = [
                c.inscribed.center[0] + c.inscribed.radius * t.cos(),
                c.inscribed.center[1] + c.inscribed.radius * t.sin(),
            ];
            prop_assert!(region.contains(p, 1e-7));
        }
        prop_assert!(c.inscribed.radius <= c.circumscribed.radius + 1e-12);
    }
}

#[test]
fn solver_beats_random_feasible_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let p = common::random_program(&mut rng);
        let r = solve(&p, 1e-9, None).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(p.max_violation(&r.x) <= 1e-9);
        for _ in 0..500 {
            let z = DVector::from_vec(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            if p.max_violation(&z) <= 0.0 {
                assert!(p.objective().dot(&z) <= r.objective + 1e-7);
            }
        }
    }
}
