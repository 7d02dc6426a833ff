//! Optimal placement of a linear movable array on a segment `[0, A]`.

use serde::{Deserialize, Serialize};

use crate::array::{Geometry1D, SensingScene};
use crate::error::{Error, Result};

/// Segment of length `A` holding `N` antennas at least `D` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment1D {
    pub length: f64,
    pub min_spacing: f64,
    pub antennas: usize,
}

impl Segment1D {
    pub fn new(length: f64, min_spacing: f64, antennas: usize) -> Result<Self> {
        let seg = Self {
            length,
            min_spacing,
            antennas,
        };
        seg.validate()?;
        Ok(seg)
    }

    /// Requires `N >= 2`, `A, D > 0` and `A >= (N-1) D`.
    pub fn validate(&self) -> Result<()> {
        let Self {
            length: a,
            min_spacing: d,
            antennas: n,
        } = *self;
        if n < 2 {
            return Err(Error::TooFewAntennas(n));
        }
        if !(a.is_finite() && a > 0.0 && d.is_finite() && d > 0.0) {
            return Err(Error::InfeasibleSegment(format!(
                "A = {a} and D = {d} must be positive and finite"
            )));
        }
        let need = (n - 1) as f64 * d;
        if a < need * (1.0 - 1e-12) {
            return Err(Error::InfeasibleSegment(format!(
                "A >= (N-1) D violated: A = {a} < {need} = ({} - 1) * {d}",
                n
            )));
        }
        Ok(())
    }
}

/// Half the antennas packed at spacing `D` from 0, the rest packed against `A`.
pub fn optimal_apv_1d(seg: &Segment1D) -> Result<Geometry1D> {
    seg.validate()?;
    let n = seg.antennas;
    let half = n / 2;
    let xs = (1..=n)
        .map(|k| {
            if k <= half {
                (k - 1) as f64 * seg.min_spacing
            } else {
                seg.length - (n - k) as f64 * seg.min_spacing
            }
        })
        .collect();
    Geometry1D::new(xs)
}

/// Variance of [`optimal_apv_1d`] in closed form.
pub fn p_closed_form(seg: &Segment1D) -> Result<f64> {
    seg.validate()?;
    let (a, d) = (seg.length, seg.min_spacing);
    let n = seg.antennas as f64;
    let lin = 3.0 * a * a - 3.0 * (n - 2.0) * d * a;
    Ok(if seg.antennas.is_multiple_of(2) {
        (lin + (n - 2.0) * (n - 1.0) * d * d) / 12.0
    } else {
        (n - 1.0) * (n + 1.0) / (12.0 * n * n) * (lin + (n * n - 3.0 * n + 3.0) * d * d)
    })
}

/// The sequence `x^(1), ..., x^(N)` obtained by moving one antenna at a time
/// onto its optimal position: the first `floor(N/2)` from the left, then the
/// rest from the inside out. Each step keeps the layout feasible and never
/// lowers the variance.
pub fn adjustment_sweep(x0: &Geometry1D, seg: &Segment1D) -> Result<Vec<Geometry1D>> {
    seg.validate()?;
    if x0.len() != seg.antennas {
        return Err(Error::InfeasibleGeometry(format!(
            "start has {} antennas, segment expects {}",
            x0.len(),
            seg.antennas
        )));
    }
    let tol = 1e-12 * seg.length.max(1.0);
    x0.check_in_segment(seg.length, seg.min_spacing, tol)?;
    let target = optimal_apv_1d(seg)?;
    let n = seg.antennas;
    let half = n / 2;
    let mut x = x0.positions().to_vec();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let j = if k <= half { k } else { n - k + half + 1 };
        x[j - 1] = target.positions()[j - 1];
        let g = Geometry1D::new(x.clone())?;
        g.check_in_segment(seg.length, seg.min_spacing, tol)?;
        out.push(g);
    }
    Ok(out)
}

/// `prefactor / p(A, N, D)`.
pub fn min_crb_1d(scene: &SensingScene, seg: &Segment1D) -> Result<f64> {
    Ok(scene.crb_prefactor(seg.antennas) / p_closed_form(seg)?)
}
