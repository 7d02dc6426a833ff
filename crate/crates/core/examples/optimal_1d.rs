//! Optimal linear placement, the one-antenna-at-a-time adjustment sequence,
//! and how the bound falls with the segment length.

use ma_lab::array::{PositionStats, SensingScene, SpatialAngles};
use ma_lab::crb::crb_1d;
use ma_lab::placement1d::{adjustment_sweep, min_crb_1d, optimal_apv_1d, p_closed_form, Segment1D};
use ma_lab::array::Geometry1D;

fn main() -> ma_lab::Result<()> {
    let seg = Segment1D::new(8.0, 1.0, 4)?;
    let start = Geometry1D::new(vec![1.0, 3.0, 6.0, 7.5])?;
    println!("start       {:?}  var {:.4}", start.positions(), PositionStats::of_1d(&start).var_x);
    for (k, g) in adjustment_sweep(&start, &seg)?.iter().enumerate() {
        println!("after k={}   {:?}  var {:.4}", k + 1, g.positions(), PositionStats::of_1d(g).var_x);
    }
    println!("closed form var {:.4}\n", p_closed_form(&seg)?);

    let scene = SensingScene::with_snr_db(SpatialAngles::from_u(0.71)?, 20.0, 0.5)?;
    let seg = Segment1D::new(10.0, 0.5, 16)?;
    let opt = optimal_apv_1d(&seg)?;
    let ulah = Geometry1D::new((0..16).map(|i| 0.5 * i as f64).collect())?;
    let (a, b) = (crb_1d(&scene, &opt).crb_u, crb_1d(&scene, &ulah).crb_u);
    println!("N=16, A=10: optimal crb {a:.4e}, half-wavelength ULA crb {b:.4e}, reduction {:.1}%", 100.0 * (1.0 - a / b));

    println!("\n     A   min crb     ratio to previous");
    let mut prev: Option<f64> = None;
    for len in [7.5, 15.0, 30.0, 60.0, 120.0] {
        let c = min_crb_1d(&scene, &Segment1D::new(len, 0.5, 16)?)?;
        let r = prev.map_or(String::new(), |p| format!("{:.4}", c / p));
        println!("{len:>6} {c:.4e}  {r}");
        prev = Some(c);
    }
    Ok(())
}
