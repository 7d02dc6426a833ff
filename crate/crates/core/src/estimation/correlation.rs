use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::music::AngleGrid;
use crate::array::{ArrayGeometry, SpatialAngles};
use crate::error::Result;

/// `q(u'|u) = |alpha(u)^H alpha(u')|^2 / N^2` over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMap {
    pub grid: AngleGrid,
    pub values: Vec<f64>,
}

impl CorrelationMap {
    pub fn local_maxima(&self, count: usize) -> Vec<(f64, f64, f64)> {
        self.grid.local_maxima(&self.values, count)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.grid.write_csv(&self.values, out)
    }
}

/// Steering-vector correlation between the true direction and `(u2, v2)`;
/// `v` components are ignored for linear arrays.
pub fn correlation(geometry: &ArrayGeometry, truth: &SpatialAngles, u2: f64, v2: f64, wavelength: f64) -> f64 {
    let (xs, ys) = geometry.coordinates();
    let k = 2.0 * PI / wavelength;
    let (du, dv) = if geometry.is_planar() {
        (u2 - truth.u, v2 - truth.v)
    } else {
        (u2 - truth.u, 0.0)
    };
    let acc: Complex64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| Complex64::cis(k * (x * du + y * dv)))
        .sum();
    let n = xs.len() as f64;
    (acc.norm_sqr() / (n * n)).min(1.0)
}

/// Correlation map over `[-1, 1]` (linear) or the unit disc (planar),
/// with unit wavelength.
pub fn correlation_map(geometry: &ArrayGeometry, truth: &SpatialAngles, grid_step: f64) -> Result<CorrelationMap> {
    let grid = if geometry.is_planar() {
        AngleGrid::planar(grid_step)?
    } else {
        AngleGrid::linear(grid_step)?
    };
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (u, v) = grid.point(i);
            correlation(geometry, truth, u, v, 1.0)
        })
        .collect();
    Ok(CorrelationMap { grid, values })
}
