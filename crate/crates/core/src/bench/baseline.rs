use serde::{Deserialize, Serialize};

use crate::array::{ArrayGeometry, Geometry1D};
use crate::error::{Error, Result};
use crate::placement2d::{check_feasible, uniform_grid, upaf_init};
use crate::region::Region;

/// Geometry schemes a scenario can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[serde(rename = "optimal-1d")]
    Optimal1d,
    #[serde(rename = "sca-2d")]
    Sca2d,
    CircularOptimal,
    Ulah,
    Ulaf,
    Upah,
    Upaf,
    Explicit,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Optimal1d => "optimal-1d",
            Scheme::Sca2d => "sca-2d",
            Scheme::CircularOptimal => "circular-optimal",
            Scheme::Ulah => "ulah",
            Scheme::Ulaf => "ulaf",
            Scheme::Upah => "upah",
            Scheme::Upaf => "upaf",
            Scheme::Explicit => "explicit",
        }
    }

    /// `Some(true)` for planar-only schemes, `Some(false)` for linear-only.
    pub fn planar(self) -> Option<bool> {
        match self {
            Scheme::Optimal1d | Scheme::Ulah | Scheme::Ulaf => Some(false),
            Scheme::Sca2d | Scheme::CircularOptimal | Scheme::Upah | Scheme::Upaf => Some(true),
            Scheme::Explicit => None,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a baseline must fit.
#[derive(Debug, Clone, PartialEq)]
pub enum Extent {
    Segment { length: f64 },
    Region(Region),
}

/// Uniform reference arrays. Coordinates are in wavelengths.
///
/// * ULAH: spacing 1/2 from 0.
/// * ULAF: spacing `A/(N-1)` spanning `[0, A]`.
/// * UPAH: `ceil(sqrt(N))` per row at spacing 1/2, truncated row-major,
///   centred on the region's inscribed circle.
/// * UPAF: full-aperture grid, truncated row-major.
pub fn generate_baseline(scheme: Scheme, n: usize, extent: &Extent, min_spacing: f64) -> Result<ArrayGeometry> {
    match (scheme, extent) {
        (Scheme::Ulah, Extent::Segment { length }) => {
            let g = Geometry1D::new((0..n).map(|i| 0.5 * i as f64).collect())?;
            g.check_in_segment(*length, min_spacing, 1e-12)?;
            Ok(g.into())
        }
        (Scheme::Ulaf, Extent::Segment { length }) => {
            if n < 2 {
                return Err(Error::TooFewAntennas(n));
            }
            let step = length / (n - 1) as f64;
            let g = Geometry1D::new((0..n).map(|i| step * i as f64).collect())?;
            g.check_in_segment(*length, min_spacing, 1e-12)?;
            Ok(g.into())
        }
        (Scheme::Upah, Extent::Region(region)) => {
            let c = region.enclosing_circles()?.inscribed.center;
            let m = crate::placement2d::grid_side(n);
            let half = 0.25 * (m - 1) as f64;
            let g = uniform_grid(n, 0.5, [c[0] - half, c[1] - half])?;
            check_feasible(&g, region, min_spacing, 1e-12)?;
            Ok(g.into())
        }
        (Scheme::Upaf, Extent::Region(region)) => Ok(upaf_init(region, n, min_spacing)?.into()),
        (s, _) => Err(Error::Unsupported(format!("{s} is not a baseline for this extent"))),
    }
}
