//! Steering-vector correlation maps: grating lobes of sparse uniform arrays.

use ma_lab::array::{ArrayGeometry, SpatialAngles};
use ma_lab::bench::{generate_baseline, Extent, Scheme};
use ma_lab::estimation::correlation_map;
use ma_lab::region::Region;

fn main() -> ma_lab::Result<()> {
    let seg = Extent::Segment { length: 10.0 };
    let truth = SpatialAngles::from_u(0.71)?;
    for scheme in [Scheme::Ulaf, Scheme::Ulah] {
        let g = generate_baseline(scheme, 16, &seg, 0.5)?;
        let map = correlation_map(&g, &truth, 1e-3)?;
        println!("{scheme} (N=16, A=10), strongest peaks:");
        for (u, _, q) in map.local_maxima(3) {
            println!("  u = {u:+.3}  q = {q:.4}");
        }
    }

    let truth = SpatialAngles::new(0.35, 0.71)?;
    let sq = Extent::Region(Region::square_centered(5.0)?);
    let g: ArrayGeometry = generate_baseline(Scheme::Upaf, 36, &sq, 0.5)?;
    let map = correlation_map(&g, &truth, 0.01)?;
    println!("upaf (N=36, side 5), peaks inside the unit disc:");
    for (u, v, q) in map.local_maxima(6) {
        println!("  ({u:+.2}, {v:+.2})  q = {q:.4}");
    }
    Ok(())
}
