//! Inscribed and circumscribed circles of a few regions, and where an
//! optimized layout lands between the resulting bounds.

use ma_lab::array::{SensingScene, SpatialAngles};
use ma_lab::crb::{crb_2d, minmax_crb, region_bounds};
use ma_lab::placement2d::{optimize_2d, upaf_init, ScaConfig};
use ma_lab::region::Region;

fn main() -> ma_lab::Result<()> {
    let scene = SensingScene::with_snr_db(SpatialAngles::new(0.35, 0.71)?, 15.0, 0.5)?;
    let regions = [
        ("square", Region::square_centered(4.0)?),
        ("hexagon", hexagon(2.0)?),
        ("triangle", Region::polygon(vec![[0.0, 0.0], [6.0, 0.0], [0.0, 4.0]])?),
    ];
    let n = 12;
    for (name, region) in regions {
        let c = region.enclosing_circles()?;
        let b = region_bounds(&scene, &region, n)?;
        let init = upaf_init(&region, n, scene.min_spacing)?;
        let (g, trace) = optimize_2d(&scene, &region, &ScaConfig::default(), &init)?;
        let crb = minmax_crb(&crb_2d(&scene, &g))?;
        println!("{name}");
        println!(
            "  inscribed   r {:.4} at ({:+.3}, {:+.3})",
            c.inscribed.radius, c.inscribed.center[0], c.inscribed.center[1]
        );
        println!(
            "  enclosing   r {:.4} at ({:+.3}, {:+.3})",
            c.circumscribed.radius, c.circumscribed.center[0], c.circumscribed.center[1]
        );
        println!(
            "  delta {:.4} -> {:.4}, bounds [{:.4}, {:.4}]",
            trace.initial_delta,
            trace.final_delta(),
            b.delta_lower,
            b.delta_upper
        );
        println!("  minmax crb {crb:.4e} in [{:.4e}, {:.4e}]", b.crb_lower, b.crb_upper);
    }
    Ok(())
}

fn hexagon(r: f64) -> ma_lab::Result<Region> {
    let v = (0..6)
        .map(|k| {
            let t = std::f64::consts::PI / 3.0 * k as f64;
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    Region::polygon(v)
}
