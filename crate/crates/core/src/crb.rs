//! Cramer-Rao bounds on the spatial-angle estimation error and their
//! region-level envelopes.

use serde::{Deserialize, Serialize};

use crate::array::{Geometry1D, Geometry2D, PositionStats, SensingScene};
use crate::error::{Error, Result};
use crate::region::Region;

pub use crate::region::EnclosingCircles;

/// Why a bound came out infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrbFlag {
    Finite,
    /// Zero coordinate variance.
    Degenerate,
    /// `var_x var_y = cov^2`: every antenna on one line.
    Collinear,
}

/// CRB values together with the statistics they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CrbReportRepr", try_from = "CrbReportRepr")]
pub struct CrbReport {
    pub prefactor: f64,
    pub crb_u: f64,
    /// `None` for linear arrays.
    pub crb_v: Option<f64>,
    pub stats: PositionStats,
    pub flag: CrbFlag,
}

#[derive(Serialize, Deserialize)]
struct CrbReportRepr {
    prefactor: f64,
    crb_u: Option<f64>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        deserialize_with = "present_field"
    )]
    crb_v: Option<Option<f64>>,
    var_x: f64,
    #[serde(default)]
    var_y: f64,
    #[serde(default)]
    cov_xy: f64,
}

// Distinguishes a `null` field (infinite bound) from an absent one (1D).
fn present_field<'de, D>(d: D) -> std::result::Result<Option<Option<f64>>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    Option::<f64>::deserialize(d).map(Some)
}

fn finite_or_null(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl From<CrbReport> for CrbReportRepr {
    fn from(r: CrbReport) -> Self {
        CrbReportRepr {
            prefactor: r.prefactor,
            crb_u: finite_or_null(r.crb_u),
            crb_v: r.crb_v.map(finite_or_null),
            var_x: r.stats.var_x,
            var_y: r.stats.var_y,
            cov_xy: r.stats.cov_xy,
        }
    }
}

impl TryFrom<CrbReportRepr> for CrbReport {
    type Error = Error;

    fn try_from(r: CrbReportRepr) -> Result<Self> {
        let crb_u = r.crb_u.unwrap_or(f64::INFINITY);
        let crb_v = r.crb_v.map(|v| v.unwrap_or(f64::INFINITY));
        let flag = if crb_u.is_finite() && crb_v.is_none_or(f64::is_finite) {
            CrbFlag::Finite
        } else if crb_v.is_some() && r.var_x > 0.0 && r.var_y > 0.0 {
            CrbFlag::Collinear
        } else {
            CrbFlag::Degenerate
        };
        Ok(CrbReport {
            prefactor: r.prefactor,
            crb_u,
            crb_v,
            stats: PositionStats {
                mean_x: 0.0,
                mean_y: 0.0,
                var_x: r.var_x,
                var_y: r.var_y,
                cov_xy: r.cov_xy,
            },
            flag,
        })
    }
}

impl CrbReport {
    pub fn is_finite(&self) -> bool {
        self.flag == CrbFlag::Finite
    }
}

/// `crb_u = prefactor / var(x)`; infinite for colocated antennas.
pub fn crb_1d(scene: &SensingScene, geometry: &Geometry1D) -> CrbReport {
    let prefactor = scene.crb_prefactor(geometry.len());
    let stats = PositionStats::of_1d(geometry);
    let (crb_u, flag) = if stats.var_x > 0.0 {
        (prefactor / stats.var_x, CrbFlag::Finite)
    } else {
        (f64::INFINITY, CrbFlag::Degenerate)
    };
    CrbReport {
        prefactor,
        crb_u,
        crb_v: None,
        stats,
        flag,
    }
}

/// `crb_u = prefactor / (var_x - cov^2/var_y)` and the mirror for `v`.
/// Collinear layouts give infinite values for both axes.
pub fn crb_2d(scene: &SensingScene, geometry: &Geometry2D) -> CrbReport {
    let prefactor = scene.crb_prefactor(geometry.len());
    let stats = PositionStats::of_2d(geometry);
    let scale = stats.var_x * stats.var_y;
    let det = scale - stats.cov_xy * stats.cov_xy;
    let flag = if stats.var_x <= 0.0 || stats.var_y <= 0.0 {
        CrbFlag::Degenerate
    } else if det <= 1e-12 * scale {
        CrbFlag::Collinear
    } else {
        CrbFlag::Finite
    };
    let (crb_u, crb_v) = if flag == CrbFlag::Finite {
        (prefactor * stats.var_y / det, prefactor * stats.var_x / det)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    CrbReport {
        prefactor,
        crb_u,
        crb_v: Some(crb_v),
        stats,
        flag,
    }
}

/// `max(crb_u, crb_v)` of a planar report.
pub fn minmax_crb(report: &CrbReport) -> Result<f64> {
    match report.crb_v {
        Some(v) => Ok(report.crb_u.max(v)),
        None => Err(Error::Unsupported("min-max CRB needs a planar report".into())),
    }
}

/// Radii `(a_ins, a_cir)` of the inscribed and circumscribed circles.
pub fn enclosing_circles(region: &Region) -> Result<(f64, f64)> {
    let e = region.enclosing_circles()?;
    Ok((e.inscribed.radius, e.circumscribed.radius))
}

/// Bounds on the max-min variance `delta` and the min-max CRB attainable in a region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBounds {
    pub a_ins: f64,
    pub a_cir: f64,
    pub delta_upper: f64,
    pub delta_lower: f64,
    pub crb_lower: f64,
    pub crb_upper: f64,
    /// True when `N = 4K` and `D <= 2 a_ins sin(pi/N)`, so the circular
    /// construction in the inscribed circle attains `delta_lower`.
    pub lower_attained: bool,
}

/// Region bounds for `antennas` elements. `delta_lower` and `crb_upper` are
/// always filled in but only certified when `lower_attained` holds.
pub fn region_bounds(scene: &SensingScene, region: &Region, antennas: usize) -> Result<RegionBounds> {
    if antennas < 2 {
        return Err(Error::TooFewAntennas(antennas));
    }
    let (a_ins, a_cir) = enclosing_circles(region)?;
    let prefactor = scene.crb_prefactor(antennas);
    let delta_upper = a_cir * a_cir / 2.0;
    let delta_lower = a_ins * a_ins / 2.0;
    let lower_attained = antennas.is_multiple_of(4)
        && scene.min_spacing <= 2.0 * a_ins * (std::f64::consts::PI / antennas as f64).sin();
    Ok(RegionBounds {
        a_ins,
        a_cir,
        delta_upper,
        delta_lower,
        crb_lower: prefactor / delta_upper,
        crb_upper: prefactor / delta_lower,
        lower_attained,
    })
}
