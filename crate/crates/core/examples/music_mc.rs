//! Monte Carlo MUSIC error against the CRB for the optimal linear array and
//! for an SCA-optimized planar array.

use ma_lab::array::{ArrayGeometry, SensingScene, SpatialAngles};
use ma_lab::crb::{crb_1d, crb_2d};
use ma_lab::estimation::{monte_carlo_mse, MusicOptions};
use ma_lab::placement1d::{optimal_apv_1d, Segment1D};
use ma_lab::placement2d::{optimize_2d, upaf_init, ScaConfig};
use ma_lab::region::Region;

fn main() -> ma_lab::Result<()> {
    let trials = 200;
    let opts = MusicOptions::default();

    let scene = SensingScene::with_snr_db(SpatialAngles::from_u(0.71)?, 25.0, 0.5)?;
    let g = optimal_apv_1d(&Segment1D::new(10.0, 0.5, 16)?)?;
    let crb = crb_1d(&scene, &g).crb_u;
    let batch = monte_carlo_mse(&scene, &ArrayGeometry::from(g), trials, 1, &opts)?;
    println!("1D: mse_u {:.3e} (se {:.1e})  crb {:.3e}  ratio {:.3}", batch.mse_u, batch.se_u, crb, batch.mse_u / crb);

    let scene = SensingScene::with_snr_db(SpatialAngles::new(0.35, 0.71)?, 25.0, 0.5)?;
    let region = Region::square_centered(5.0)?;
    let init = upaf_init(&region, 16, 0.5)?;
    let (g, _) = optimize_2d(&scene, &region, &ScaConfig::default(), &init)?;
    let rep = crb_2d(&scene, &g);
    let batch = monte_carlo_mse(&scene, &ArrayGeometry::from(g), trials, 2, &opts)?;
    let (mv, cv) = (batch.mse_v.unwrap_or(f64::NAN), rep.crb_v.unwrap_or(f64::NAN));
    println!("2D: mse_u {:.3e} crb_u {:.3e} ratio {:.3}", batch.mse_u, rep.crb_u, batch.mse_u / rep.crb_u);
    println!("    mse_v {:.3e} crb_v {:.3e} ratio {:.3}", mv, cv, mv / cv);
    Ok(())
}
