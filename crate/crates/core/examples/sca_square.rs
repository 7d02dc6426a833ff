//! Optimizes 36 antennas in a 5-wavelength square starting from the
//! full-aperture grid and prints the convergence trace.

use std::time::Instant;

use ma_lab::array::{SensingScene, SpatialAngles};
use ma_lab::crb::{crb_2d, minmax_crb, region_bounds};
use ma_lab::placement2d::{delta_of, optimize_2d, upaf_init, ScaConfig};
use ma_lab::region::Region;

fn main() -> ma_lab::Result<()> {
    let n = 36;
    let scene = SensingScene::with_snr_db(SpatialAngles::new(0.35, 0.71)?, 15.0, 0.5)?;
    let region = Region::square_centered(5.0)?;
    let init = upaf_init(&region, n, scene.min_spacing)?;

    let t0 = Instant::now();
    let (best, trace) = optimize_2d(&scene, &region, &ScaConfig::default(), &init)?;
    let elapsed = t0.elapsed();

    trace.write_csv(std::io::stdout())?;
    let bounds = region_bounds(&scene, &region, n)?;
    println!();
    println!("delta: {:.4} -> {:.4}  (bounds [{:.4}, {:.4}])", delta_of(&init), delta_of(&best), bounds.delta_lower, bounds.delta_upper);
    println!(
        "min-max CRB: {:.3e} -> {:.3e}",
        minmax_crb(&crb_2d(&scene, &init))?,
        minmax_crb(&crb_2d(&scene, &best))?
    );
    println!("{} subproblems in {:.2?}", trace.subproblem_solves, elapsed);
    println!("{}", serde_json::to_string(&best)?);
    Ok(())
}
