//! Array geometry, scene parameters and the position statistics that drive
//! every bound in the crate.
//!
//! Coordinates are expressed in the same length unit as
//! [`SensingScene::wavelength`]; with the default wavelength of 1 they are in
//! wavelengths.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered 1D antenna positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Geometry1DRepr", into = "Geometry1DRepr")]
pub struct Geometry1D {
    positions: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Geometry1DRepr {
    xs: Vec<f64>,
}

impl TryFrom<Geometry1DRepr> for Geometry1D {
    type Error = Error;

    fn try_from(r: Geometry1DRepr) -> Result<Self> {
        Geometry1D::new(r.xs)
    }
}

impl From<Geometry1D> for Geometry1DRepr {
    fn from(g: Geometry1D) -> Self {
        Geometry1DRepr { xs: g.positions }
    }
}

impl Geometry1D {
    /// Sorts the positions ascending. Requires at least two finite values.
    pub fn new(mut positions: Vec<f64>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::TooFewAntennas(positions.len()));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        positions.sort_by(f64::total_cmp);
        Ok(Self { positions })
    }

    /// Like [`Geometry1D::new`], then checks consecutive gaps against `min_spacing`.
    pub fn with_spacing(positions: Vec<f64>, min_spacing: f64) -> Result<Self> {
        let g = Self::new(positions)?;
        if let Some(gap) = g.min_gap().filter(|&gap| gap < min_spacing) {
            return Err(Error::InfeasibleGeometry(format!(
                "minimum gap {gap} is below spacing {min_spacing}"
            )));
        }
        Ok(g)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Smallest gap between neighbouring antennas.
    pub fn min_gap(&self) -> Option<f64> {
        self.positions
            .windows(2)
            .map(|w| w[1] - w[0])
            .min_by(f64::total_cmp)
    }

    /// Checks `0 <= x_1`, `x_N <= length` and every gap `>= min_spacing`,
    /// all with absolute slack `tol`.
    pub fn check_in_segment(&self, length: f64, min_spacing: f64, tol: f64) -> Result<()> {
        let first = self.positions[0];
        let last = self.positions[self.len() - 1];
        if first < -tol {
            return Err(Error::InfeasibleGeometry(format!("x_1 = {first} < 0")));
        }
        if last > length + tol {
            return Err(Error::InfeasibleGeometry(format!("x_N = {last} > A = {length}")));
        }
        for (n, w) in self.positions.windows(2).enumerate() {
            if w[1] - w[0] < min_spacing - tol {
                return Err(Error::InfeasibleGeometry(format!(
                    "gap between antennas {} and {} is {} < D = {min_spacing}",
                    n + 1,
                    n + 2,
                    w[1] - w[0]
                )));
            }
        }
        Ok(())
    }

    /// Same positions shifted by `offset`.
    pub fn translated(&self, offset: f64) -> Self {
        Self {
            positions: self.positions.iter().map(|x| x + offset).collect(),
        }
    }

    /// Same positions scaled about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.positions.iter().map(|x| x * factor).collect())
    }
}

/// Planar antenna positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Geometry2DRepr", into = "Geometry2DRepr")]
pub struct Geometry2D {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Geometry2DRepr {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl TryFrom<Geometry2DRepr> for Geometry2D {
    type Error = Error;

    fn try_from(r: Geometry2DRepr) -> Result<Self> {
        Geometry2D::new(r.xs, r.ys)
    }
}

impl From<Geometry2D> for Geometry2DRepr {
    fn from(g: Geometry2D) -> Self {
        Geometry2DRepr { xs: g.xs, ys: g.ys }
    }
}

impl Geometry2D {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InfeasibleGeometry(format!(
                "{} x-coordinates but {} y-coordinates",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::TooFewAntennas(xs.len()));
        }
        if let Some(i) = xs
            .iter()
            .zip(&ys)
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { xs, ys })
    }

    pub fn from_points(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(
            points.iter().map(|p| p[0]).collect(),
            points.iter().map(|p| p[1]).collect(),
        )
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn point(&self, n: usize) -> [f64; 2] {
        [self.xs[n], self.ys[n]]
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.xs.iter().zip(&self.ys).map(|(&x, &y)| [x, y])
    }

    /// Smallest pairwise Euclidean distance, with the pair that attains it.
    pub fn min_pair_distance(&self) -> (f64, usize, usize) {
        let mut best = (f64::INFINITY, 0, 0);
        for k in 0..self.len() {
            for l in (k + 1)..self.len() {
                let d = (self.xs[k] - self.xs[l]).hypot(self.ys[k] - self.ys[l]);
                if d < best.0 {
                    best = (d, k, l);
                }
            }
        }
        best
    }

    pub fn swapped_axes(&self) -> Self {
        Self {
            xs: self.ys.clone(),
            ys: self.xs.clone(),
        }
    }

    /// Rotation by +90 degrees about the origin: `(x, y) -> (-y, x)`.
    pub fn rotated_quarter_turn(&self) -> Self {
        Self {
            xs: self.ys.iter().map(|y| -y).collect(),
            ys: self.xs.clone(),
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            xs: self.xs.iter().map(|x| x + dx).collect(),
            ys: self.ys.iter().map(|y| y + dy).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            xs: self.xs.iter().map(|x| x * factor).collect(),
            ys: self.ys.iter().map(|y| y * factor).collect(),
        }
    }
}

/// Direction cosines of the arrival path.
///
/// In 1D only `u = cos(theta)` is used. In 2D, `u = sin(theta) cos(phi)`,
/// `v = cos(theta)` and `w = sin(theta) sin(phi)`; `w` never enters a formula
/// because every antenna sits in the `z = 0` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialAngles {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl SpatialAngles {
    pub fn from_u(u: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&u) {
            return Err(Error::AngleOutOfRange(format!("|u| = {} > 1", u.abs())));
        }
        Ok(Self {
            u,
            v: 0.0,
            w: (1.0 - u * u).max(0.0).sqrt(),
        })
    }

    pub fn new(u: f64, v: f64) -> Result<Self> {
        let r2 = u * u + v * v;
        if !u.is_finite() || !v.is_finite() || r2 > 1.0 + 1e-12 {
            return Err(Error::AngleOutOfRange(format!("u^2 + v^2 = {r2} > 1")));
        }
        Ok(Self {
            u,
            v,
            w: (1.0 - r2).max(0.0).sqrt(),
        })
    }

    /// 1D steering angle `vartheta` in radians, `u = cos(vartheta)`.
    pub fn from_steering_angle(vartheta: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&vartheta) {
            return Err(Error::AngleOutOfRange(format!("vartheta = {vartheta} outside [0, pi]")));
        }
        Self::from_u(vartheta.cos())
    }

    /// Elevation `theta` and azimuth `phi` in radians.
    pub fn from_elevation_azimuth(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..=PI).contains(&phi) {
            return Err(Error::AngleOutOfRange(format!(
                "theta = {theta}, phi = {phi} outside [0, pi]"
            )));
        }
        Ok(Self {
            u: theta.sin() * phi.cos(),
            v: theta.cos(),
            w: theta.sin() * phi.sin(),
        })
    }
}

/// How the transmitted symbols `s_t` are drawn during synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalModel {
    /// `|s_t|^2 = P` exactly with a uniformly random phase.
    #[default]
    ConstantModulus,
    /// Circularly-symmetric complex Gaussian with `E|s_t|^2 = P`.
    Gaussian,
}

/// Physical parameters shared by bounds and simulation. The antenna count
/// comes from the geometry each routine is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingScene {
    pub snapshots: usize,
    pub wavelength: f64,
    pub signal_power: f64,
    pub noise_power: f64,
    /// `|beta|`.
    pub beta_abs: f64,
    /// Fixed path phase in radians; `None` draws it uniformly per trial.
    pub beta_phase: Option<f64>,
    pub angles: SpatialAngles,
    pub min_spacing: f64,
    #[serde(default)]
    pub signal_model: SignalModel,
}

impl SensingScene {
    /// Unit wavelength, power and `|beta|`, one snapshot, noise set from `snr_db`
    /// (`SNR = P |beta|^2 / sigma^2`).
    pub fn with_snr_db(angles: SpatialAngles, snr_db: f64, min_spacing: f64) -> Result<Self> {
        let scene = Self {
            snapshots: 1,
            wavelength: 1.0,
            signal_power: 1.0,
            noise_power: 10f64.powf(-snr_db / 10.0),
            beta_abs: 1.0,
            beta_phase: None,
            angles,
            min_spacing,
            signal_model: SignalModel::default(),
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidScene(what.to_string()));
        if self.snapshots < 1 {
            return bad("T must be >= 1");
        }
        if !(self.signal_power > 0.0) {
            return bad("P must be > 0");
        }
        if !(self.noise_power > 0.0) {
            return bad("sigma^2 must be > 0");
        }
        if !(self.wavelength > 0.0) {
            return bad("wavelength must be > 0");
        }
        if !(self.min_spacing > 0.0) {
            return bad("D must be > 0");
        }
        if !(self.beta_abs >= 0.0) {
            return bad("|beta| must be >= 0");
        }
        Ok(())
    }

    /// `P |beta|^2 / sigma^2` in dB.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.signal_power * self.beta_abs.powi(2) / self.noise_power).log10()
    }

    pub fn set_snr_db(&mut self, snr_db: f64) {
        self.noise_power = self.signal_power * self.beta_abs.powi(2) / 10f64.powf(snr_db / 10.0);
    }

    /// Path coefficient with the given phase.
    pub fn beta(&self, phase: f64) -> Complex64 {
        Complex64::from_polar(self.beta_abs, phase)
    }

    /// `sigma^2 lambda^2 / (8 pi^2 T P N |beta|^2)`.
    pub fn crb_prefactor(&self, antennas: usize) -> f64 {
        self.noise_power * self.wavelength.powi(2)
            / (8.0
                * PI
                * PI
                * self.snapshots as f64
                * self.signal_power
                * antennas as f64
                * self.beta_abs.powi(2))
    }
}

/// First and second moments of the antenna coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionStats {
    pub mean_x: f64,
    pub mean_y: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `(1/N) sum a_n b_n - mean(a) mean(b)`, evaluated on centred data.
pub(crate) fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / a.len() as f64
}

pub(crate) fn variance(a: &[f64]) -> f64 {
    covariance(a, a)
}

impl PositionStats {
    pub fn of_1d(geometry: &Geometry1D) -> Self {
        let x = geometry.positions();
        Self {
            mean_x: mean(x),
            mean_y: 0.0,
            var_x: variance(x),
            var_y: 0.0,
            cov_xy: 0.0,
        }
    }

    pub fn of_2d(geometry: &Geometry2D) -> Self {
        let (x, y) = (geometry.xs(), geometry.ys());
        Self {
            mean_x: mean(x),
            mean_y: mean(y),
            var_x: variance(x),
            var_y: variance(y),
            cov_xy: covariance(x, y),
        }
    }

    /// `var_x - cov^2 / var_y`, or 0 when `var_y` vanishes.
    pub fn effective_var_x(&self) -> f64 {
        schur(self.var_x, self.var_y, self.cov_xy)
    }

    pub fn effective_var_y(&self) -> f64 {
        schur(self.var_y, self.var_x, self.cov_xy)
    }

    /// `min(effective_var_x, effective_var_y)`, the max-min objective.
    pub fn delta(&self) -> f64 {
        self.effective_var_x().min(self.effective_var_y())
    }
}

fn schur(var_a: f64, var_b: f64, cov: f64) -> f64 {
    let det = var_a * var_b - cov * cov;
    if var_b <= 0.0 || det <= 0.0 {
        0.0
    } else {
        det / var_b
    }
}

/// Position statistics of a 1D array (N >= 2 is enforced by the type).
pub fn position_stats_1d(geometry: &Geometry1D) -> PositionStats {
    PositionStats::of_1d(geometry)
}

pub fn position_stats_2d(geometry: &Geometry2D) -> PositionStats {
    PositionStats::of_2d(geometry)
}

/// Steering vector of a linear array: entry `n` is `exp(j 2 pi x_n u / lambda)`.
pub fn steering_vector_1d(geometry: &Geometry1D, u: f64, wavelength: f64) -> Result<Vec<Complex64>> {
    if !(u.abs() <= 1.0) {
        return Err(Error::AngleOutOfRange(format!("|u| = {} > 1", u.abs())));
    }
    Ok(steering_1d_unchecked(geometry.positions(), u, wavelength))
}

pub(crate) fn steering_1d_unchecked(xs: &[f64], u: f64, wavelength: f64) -> Vec<Complex64> {
    let k = 2.0 * PI / wavelength;
    xs.iter().map(|x| Complex64::cis(k * x * u)).collect()
}

/// Steering vector of a planar array: entry `n` is `exp(j 2 pi (x_n u + y_n v) / lambda)`.
pub fn steering_vector_2d(
    geometry: &Geometry2D,
    u: f64,
    v: f64,
    wavelength: f64,
) -> Result<Vec<Complex64>> {
    if !(u * u + v * v <= 1.0 + 1e-12) {
        return Err(Error::AngleOutOfRange(format!("u^2 + v^2 = {} > 1", u * u + v * v)));
    }
    Ok(steering_2d_unchecked(geometry.xs(), geometry.ys(), u, v, wavelength))
}

pub(crate) fn steering_2d_unchecked(
    xs: &[f64],
    ys: &[f64],
    u: f64,
    v: f64,
    wavelength: f64,
) -> Vec<Complex64> {
    let k = 2.0 * PI / wavelength;
    xs.iter()
        .zip(ys)
        .map(|(x, y)| Complex64::cis(k * (x * u + y * v)))
        .collect()
}

/// Line-of-sight channel `h = beta * alpha`.
pub fn channel(beta: Complex64, steering: &[Complex64]) -> Vec<Complex64> {
    steering.iter().map(|a| beta * a).collect()
}

/// Either kind of array, for routines that accept both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArrayGeometry {
    Planar(Geometry2D),
    Linear(Geometry1D),
}

impl ArrayGeometry {
    pub fn len(&self) -> usize {
        match self {
            ArrayGeometry::Linear(g) => g.len(),
            ArrayGeometry::Planar(g) => g.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_planar(&self) -> bool {
        matches!(self, ArrayGeometry::Planar(_))
    }

    /// Steering vector towards `(u, v)`; `v` is ignored for linear arrays.
    pub fn steering(&self, u: f64, v: f64, wavelength: f64) -> Result<Vec<Complex64>> {
        match self {
            ArrayGeometry::Linear(g) => steering_vector_1d(g, u, wavelength),
            ArrayGeometry::Planar(g) => steering_vector_2d(g, u, v, wavelength),
        }
    }

    /// `(xs, ys)` with zeros for the `y` of a linear array.
    pub fn coordinates(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ArrayGeometry::Linear(g) => (g.positions().to_vec(), vec![0.0; g.len()]),
            ArrayGeometry::Planar(g) => (g.xs().to_vec(), g.ys().to_vec()),
        }
    }
}

impl From<Geometry1D> for ArrayGeometry {
    fn from(g: Geometry1D) -> Self {
        ArrayGeometry::Linear(g)
    }
}

impl From<Geometry2D> for ArrayGeometry {
    fn from(g: Geometry2D) -> Self {
        ArrayGeometry::Planar(g)
    }
}
