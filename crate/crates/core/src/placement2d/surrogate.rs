//! Convex surrogate subproblems for one coordinate axis.
//!
//! With the other axis `w` fixed, the moving axis `m` and a free `delta`
//! satisfy
//!
//! * `(w^T B m)^2 / (w^T B w) - 2 (m^p)^T B m + (m^p)^T B m^p + delta <= 0`
//! * `(w^T B m)^2 <= (2 (m^p)^T B m - (m^p)^T B m^p) (w^T B w - delta)`
//! * `((m_k^p - m_l^p)(m_k - m_l) + (w_k - w_l)^2) / d_kl^p >= D` per pair
//! * region membership of every antenna,
//!
//! where `B = I/N - 11^T/N^2`. Every constraint is tight at the reference
//! point, so `(m^p, delta(m^p, w))` is always feasible.

use nalgebra::{DMatrix, DVector};

use crate::array::{covariance, variance};
use crate::conic::ConicProgram;
use crate::error::{Error, Result};
use crate::region::Region;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
        }
    }
}

/// A surrogate program plus the mapping back to antenna coordinates.
///
/// Antennas whose admissible interval along the moving axis has collapsed to
/// a point (e.g. the top of a circle when moving in `x`) are held fixed and
/// do not appear as variables. The last variable is always `delta`.
#[derive(Debug, Clone)]
pub struct Subproblem {
    pub program: ConicProgram,
    pub axis: Axis,
    /// Antenna index of each coordinate variable.
    pub free: Vec<usize>,
    /// Reference coordinates along the moving axis.
    pub reference: Vec<f64>,
}

impl Subproblem {
    pub fn delta_index(&self) -> usize {
        self.free.len()
    }

    /// Variable vector for the reference point with the given `delta`.
    pub fn point_at_reference(&self, delta: f64) -> Vec<f64> {
        self.free
            .iter()
            .map(|&n| self.reference[n])
            .chain(std::iter::once(delta))
            .collect()
    }

    /// Full coordinate vector and `delta` from a variable vector.
    pub fn expand(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let mut m = self.reference.clone();
        for (f, &n) in self.free.iter().enumerate() {
            m[n] = z[f];
        }
        (m, z[self.free.len()])
    }
}

/// Surrogate in the `x` coordinates around `x_p` with `y` fixed.
pub fn build_subproblem_x(x_p: &[f64], y: &[f64], region: &Region, d: f64) -> Result<Subproblem> {
    build(Axis::X, x_p, y, region, d)
}

/// Surrogate in the `y` coordinates around `y_q` with `x` fixed.
pub fn build_subproblem_y(y_q: &[f64], x: &[f64], region: &Region, d: f64) -> Result<Subproblem> {
    build(Axis::Y, y_q, x, region, d)
}

/// `[lo, hi]` reachable along `axis` by an antenna whose other coordinate is `w`.
fn admissible_interval(region: &Region, axis: Axis, w: f64) -> (f64, f64) {
    let (a, o) = (axis.index(), 1 - axis.index());
    match region {
        Region::Circle { center, radius } => {
            let h = (radius * radius - (w - center[o]).powi(2)).max(0.0).sqrt();
            (center[a] - h, center[a] + h)
        }
        _ => {
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for p in region.half_planes() {
                let na = p.normal[a];
                let rhs = p.offset - p.normal[o] * w;
                if na > 1e-14 {
                    hi = hi.min(rhs / na);
                } else if na < -1e-14 {
                    lo = lo.max(rhs / na);
                }
            }
            (lo, hi)
        }
    }
}

/// Antennas whose admissible interval is narrower than this fraction of the
/// region size are held fixed; their barrier would otherwise be ill-posed.
const PIN_WIDTH: f64 = 1e-4;

fn build(axis: Axis, m_p: &[f64], w: &[f64], region: &Region, d: f64) -> Result<Subproblem> {
    let n = m_p.len();
    if n != w.len() {
        return Err(Error::MalformedProgram(format!(
            "coordinate lengths differ: {} vs {}",
            n,
            w.len()
        )));
    }
    if n < 2 {
        return Err(Error::TooFewAntennas(n));
    }
    let wbw = variance(w);
    if !(wbw > 0.0) {
        return Err(Error::Degenerate(format!(
            "fixed {} coordinates have zero variance",
            match axis {
                Axis::X => "y",
                Axis::Y => "x",
            }
        )));
    }
    for k in 0..n {
        for l in k + 1..n {
            if (m_p[k] - m_p[l]).hypot(w[k] - w[l]) < 1e-9 {
                return Err(Error::CoincidentReference(k, l));
            }
        }
    }

    let (bbox_lo, bbox_hi) = region.bounding_box();
    let scale = (bbox_hi[0] - bbox_lo[0]).max(bbox_hi[1] - bbox_lo[1]);
    let free: Vec<usize> = (0..n)
        .filter(|&i| {
            let (lo, hi) = admissible_interval(region, axis, w[i]);
            hi - lo > PIN_WIDTH * scale
        })
        .collect();
    let nf = free.len();
    let nv = nf + 1;
    let mut slot = vec![None; n];
    for (f, &i) in free.iter().enumerate() {
        slot[i] = Some(f);
    }

    let mean_m = m_p.iter().sum::<f64>() / n as f64;
    let mean_w = w.iter().sum::<f64>() / n as f64;
    let bw: Vec<f64> = w.iter().map(|v| (v - mean_w) / n as f64).collect();
    let bm: Vec<f64> = m_p.iter().map(|v| (v - mean_m) / n as f64).collect();
    let g1p = variance(m_p);

    // w^T B m = a_w^T z + c_w,  (m^p)^T B m = a_p^T z + c_p
    let mut a_w = DVector::zeros(nv);
    let mut a_p = DVector::zeros(nv);
    let (mut c_w, mut c_p) = (0.0, 0.0);
    for i in 0..n {
        match slot[i] {
            Some(f) => {
                a_w[f] = bw[i];
                a_p[f] = bm[i];
            }
            None => {
                c_w += bw[i] * m_p[i];
                c_p += bm[i] * m_p[i];
            }
        }
    }

    let mut prog = ConicProgram::new(nv);
    prog.maximize_variable(nf);

    let s2 = 1.0 / wbw;
    let factor = DMatrix::from_row_slice(1, nv, (&a_w * s2.sqrt()).as_slice());
    let mut q = &a_w * (2.0 * s2 * c_w) - &a_p * 2.0;
    q[nf] = 1.0;
    let c = s2 * c_w * c_w - 2.0 * c_p + g1p;
    prog.add_quadratic_factored(factor, q, c)?;

    let mut e = DVector::zeros(nv);
    e[nf] = -1.0;
    prog.add_rotated_cone(a_w.clone(), c_w, &a_p * 2.0, 2.0 * c_p - g1p, e, wbw)?;

    for k in 0..n {
        for l in k + 1..n {
            if slot[k].is_none() && slot[l].is_none() {
                continue;
            }
            let dm = m_p[k] - m_p[l];
            let dw = w[k] - w[l];
            let dist = dm.hypot(dw);
            if dm.abs() <= 1e-14 * dist {
                continue;
            }
            // dm (m_k - m_l) >= D dist - dw^2
            let mut row = DVector::zeros(nv);
            let mut rhs = d * dist - dw * dw;
            match slot[k] {
                Some(f) => row[f] += dm,
                None => rhs -= dm * m_p[k],
            }
            match slot[l] {
                Some(f) => row[f] -= dm,
                None => rhs += dm * m_p[l],
            }
            prog.add_linear_ge(row, rhs)?;
        }
    }

    let (a, o) = (axis.index(), 1 - axis.index());
    for (f, &i) in free.iter().enumerate() {
        match region {
            Region::Circle { center, radius } => {
                let mut fm = DMatrix::zeros(2, nv);
                fm[(0, f)] = 1.0;
                let g = DVector::from_vec(vec![-center[a], w[i] - center[o]]);
                prog.add_second_order_cone(fm, g, DVector::zeros(nv), *radius)?;
            }
            _ => {
                for p in region.half_planes() {
                    let na = p.normal[a];
                    if na.abs() <= 1e-14 {
                        continue;
                    }
                    let mut row = DVector::zeros(nv);
                    row[f] = na;
                    prog.add_linear_le(row, p.offset - p.normal[o] * w[i])?;
                }
            }
        }
    }

    Ok(Subproblem {
        program: prog,
        axis,
        free,
        reference: m_p.to_vec(),
    })
}

/// `G(m, w) = var(m) - cov(m, w)^2 / var(w)`.
pub fn g_value(m: &[f64], w: &[f64]) -> f64 {
    let vw = variance(w);
    let c = covariance(m, w);
    variance(m) - c * c / vw
}

/// First-order lower bound of `var(x)` at `x_p`: `2 (x^p)^T B x - (x^p)^T B x^p`.
pub fn linearized_variance(x: &[f64], x_p: &[f64]) -> f64 {
    2.0 * covariance(x_p, x) - variance(x_p)
}
