//! Optimal layout in a circular region and the bounds it certifies for
//! other regions through their inscribed and circumscribed circles.

use std::f64::consts::PI;

use ma_lab::array::{PositionStats, SensingScene, SpatialAngles};
use ma_lab::crb::{crb_2d, minmax_crb, region_bounds};
use ma_lab::placement2d::circular_optimal;
use ma_lab::region::Region;

fn main() -> ma_lab::Result<()> {
    let d = 2.0 * (PI / 12.0).sin();
    let g = circular_optimal(8, 1.0, d)?;
    let s = PositionStats::of_2d(&g);
    println!("N=8 in the unit circle, D = {d:.4}");
    for p in g.points() {
        println!("  ({:+.4}, {:+.4})", p[0], p[1]);
    }
    println!("var_x {:.12} var_y {:.12} cov {:.1e} min gap {:.4}", s.var_x, s.var_y, s.cov_xy, g.min_pair_distance().0);

    let scene = SensingScene::with_snr_db(SpatialAngles::new(0.35, 0.71)?, 15.0, d)?;
    let circle = Region::circle([0.0, 0.0], 1.0)?;
    let b = region_bounds(&scene, &circle, 8)?;
    println!("minmax crb {:.6e}, circle lower bound {:.6e}", minmax_crb(&crb_2d(&scene, &g))?, b.crb_lower);

    let scene = SensingScene::with_snr_db(SpatialAngles::new(0.35, 0.71)?, 15.0, 0.5)?;
    let regions = [
        ("square 5", Region::square_centered(5.0)?),
        ("triangle", Region::polygon(vec![[0.0, 0.0], [6.0, 0.0], [0.0, 4.0]])?),
    ];
    for (name, r) in regions {
        let b = region_bounds(&scene, &r, 16)?;
        println!(
            "{name:>9}: a_ins {:.4} a_cir {:.4}  minmax crb in [{:.4e}, {:.4e}]  upper certified: {}",
            b.a_ins, b.a_cir, b.crb_lower, b.crb_upper, b.lower_attained
        );
    }
    Ok(())
}
