use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::synth::SnapshotBlock;
use crate::array::ArrayGeometry;
use crate::error::{Error, Result};

/// Eigen-decomposition of the sample covariance `R = Y Y^H / T` split into a
/// one-dimensional signal subspace and an `N - 1` dimensional noise subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceDecomposition {
    pub signal: DVector<Complex64>,
    /// Orthonormal columns spanning the complement of `signal`.
    pub noise: DMatrix<Complex64>,
    /// Eigenvalues of `R`, descending; the first belongs to `signal`.
    pub eigenvalues: Vec<f64>,
    /// The leading eigenvalue is not separated from the rest.
    pub degenerate: bool,
}

impl SubspaceDecomposition {
    /// Leading over second eigenvalue in dB (`inf` when the rest vanish).
    pub fn separation_db(&self) -> f64 {
        10.0 * (self.eigenvalues[0] / self.eigenvalues[1].max(0.0)).log10()
    }
}

pub fn decompose(block: &SnapshotBlock) -> SubspaceDecomposition {
    let y = &block.y;
    let n = y.nrows();
    let r = y * y.adjoint() / Complex64::from(y.ncols() as f64);
    let eig = SymmetricEigen::new(r);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let signal = eig.eigenvectors.column(order[0]).into_owned();
    let noise = DMatrix::from_fn(n, n - 1, |r, c| eig.eigenvectors[(r, order[c + 1])]);
    let top = eigenvalues[0];
    let degenerate = n < 2 || top <= 0.0 || (top - eigenvalues[1]) <= 1e-9 * top;
    SubspaceDecomposition {
        signal,
        noise,
        eigenvalues,
        degenerate,
    }
}

/// Sampling grid of a pseudo-spectrum or correlation map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngleGrid {
    Linear { u: Vec<f64> },
    /// Values are stored row-major over `(u, v)`.
    Planar { u: Vec<f64>, v: Vec<f64> },
}

impl AngleGrid {
    pub fn linear(step: f64) -> Result<Self> {
        Ok(AngleGrid::Linear { u: axis(step)? })
    }

    pub fn planar(step: f64) -> Result<Self> {
        let a = axis(step)?;
        Ok(AngleGrid::Planar { u: a.clone(), v: a })
    }

    pub fn len(&self) -> usize {
        match self {
            AngleGrid::Linear { u } => u.len(),
            AngleGrid::Planar { u, v } => u.len() * v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(u, v)` of flat index `i`.
    pub fn point(&self, i: usize) -> (f64, f64) {
        match self {
            AngleGrid::Linear { u } => (u[i], 0.0),
            AngleGrid::Planar { u, v } => (u[i / v.len()], v[i % v.len()]),
        }
    }

    fn admissible(&self, i: usize) -> bool {
        let (u, v) = self.point(i);
        u * u + v * v <= 1.0 + 1e-12
    }

    fn neighbours(&self, i: usize) -> Vec<usize> {
        match self {
            AngleGrid::Linear { u } => {
                let mut out = Vec::with_capacity(2);
                if i > 0 {
                    out.push(i - 1);
                }
                if i + 1 < u.len() {
                    out.push(i + 1);
                }
                out
            }
            AngleGrid::Planar { u, v } => {
                let (iu, iv) = ((i / v.len()) as isize, (i % v.len()) as isize);
                let mut out = Vec::with_capacity(8);
                for du in -1..=1 {
                    for dv in -1..=1 {
                        let (a, b) = (iu + du, iv + dv);
                        if (du, dv) != (0, 0)
                            && a >= 0
                            && b >= 0
                            && (a as usize) < u.len()
                            && (b as usize) < v.len()
                        {
                            out.push(a as usize * v.len() + b as usize);
                        }
                    }
                }
                out
            }
        }
    }

    /// Local maxima of `values` inside the unit disc, largest first.
    pub fn local_maxima(&self, values: &[f64], count: usize) -> Vec<(f64, f64, f64)> {
        let mut peaks: Vec<(usize, f64)> = (0..values.len())
            .filter(|&i| self.admissible(i))
            .filter(|&i| {
                self.neighbours(i)
                    .into_iter()
                    .filter(|&j| self.admissible(j))
                    .all(|j| values[j] < values[i] || (values[j] == values[i] && j > i))
            })
            .map(|i| (i, values[i]))
            .collect();
        peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        peaks
            .into_iter()
            .take(count)
            .map(|(i, val)| {
                let (u, v) = self.point(i);
                (u, v, val)
            })
            .collect()
    }

    /// Writes `u,value` or `u,v,value` rows for points inside the unit disc.
    pub fn write_csv<W: Write>(&self, values: &[f64], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match self {
            AngleGrid::Linear { u } => {
                w.write_record(["u", "value"])?;
                for (a, val) in u.iter().zip(values) {
                    w.write_record([format!("{a:.6}"), format!("{val:.11e}")])?;
                }
            }
            AngleGrid::Planar { .. } => {
                w.write_record(["u", "v", "value"])?;
                for (i, val) in values.iter().enumerate() {
                    if self.admissible(i) {
                        let (a, b) = self.point(i);
                        w.write_record([format!("{a:.6}"), format!("{b:.6}"), format!("{val:.11e}")])?;
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::Io {
            path: "<grid>".into(),
            source: e,
        })?;
        Ok(())
    }
}

fn axis(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Config(format!("grid step must lie in (0, 1], got {step}")));
    }
    let m = (2.0 / step).round() as usize;
    Ok((0..=m).map(|i| -1.0 + 2.0 * i as f64 / m as f64).collect())
}

/// Pseudo-spectrum `1 / (alpha^H U_z U_z^H alpha)` over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MusicSpectrum {
    pub grid: AngleGrid,
    pub values: Vec<f64>,
    /// Best grid point `(u, v)`; `v = 0` for linear arrays.
    pub peak: (f64, f64),
    /// Refined estimate (equal to `peak` without refinement).
    pub estimate: (f64, f64),
}

impl MusicSpectrum {
    pub fn local_maxima(&self, count: usize) -> Vec<(f64, f64, f64)> {
        self.grid.local_maxima(&self.values, count)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        self.grid.write_csv(&self.values, out)
    }
}

/// `alpha^H U_z U_z^H alpha = N - |u_s^H alpha|^2` for a unit-modulus steering vector.
struct Denominator<'a> {
    signal: Vec<Complex64>,
    xs: &'a [f64],
    ys: Vec<f64>,
    k: f64,
}

impl<'a> Denominator<'a> {
    fn new(decomp: &SubspaceDecomposition, xs: &'a [f64], ys: Vec<f64>, wavelength: f64) -> Self {
        Self {
            signal: decomp.signal.iter().map(|z| z.conj()).collect(),
            xs,
            ys,
            k: 2.0 * PI / wavelength,
        }
    }

    fn at(&self, u: f64, v: f64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for ((s, x), y) in self.signal.iter().zip(self.xs).zip(&self.ys) {
            acc += s * Complex64::cis(self.k * (x * u + y * v));
        }
        (self.xs.len() as f64 - acc.norm_sqr()).max(0.0)
    }

    fn grid(&self, grid: &AngleGrid) -> Vec<f64> {
        let n = self.xs.len() as f64;
        match grid {
            AngleGrid::Linear { u } => u.par_iter().map(|&a| self.at(a, 0.0)).collect(),
            AngleGrid::Planar { u, v } => {
                // separable phases: conj(u_s) e^{jkxu} per row, e^{jkyv} per column
                let cols: Vec<Vec<Complex64>> = v
                    .iter()
                    .map(|&b| self.ys.iter().map(|y| Complex64::cis(self.k * y * b)).collect())
                    .collect();
                u.par_iter()
                    .flat_map_iter(|&a| {
                        let row: Vec<Complex64> = self
                            .signal
                            .iter()
                            .zip(self.xs)
                            .map(|(s, x)| s * Complex64::cis(self.k * x * a))
                            .collect();
                        cols.iter()
                            .map(|col| {
                                let acc: Complex64 = row.iter().zip(col).map(|(r, c)| r * c).sum();
                                (n - acc.norm_sqr()).max(0.0)
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect()
            }
        }
    }
}

fn pseudo(den: f64) -> f64 {
    1.0 / den.max(1e-300)
}

fn argmin_admissible(grid: &AngleGrid, den: &[f64]) -> usize {
    let mut best = usize::MAX;
    for (i, d) in den.iter().enumerate() {
        if grid.admissible(i) && (best == usize::MAX || *d < den[best]) {
            best = i;
        }
    }
    best
}

/// Parabola through three equally spaced samples: vertex offset in steps.
fn parabola_offset(fm: f64, f0: f64, fp: f64) -> f64 {
    let curv = fm - 2.0 * f0 + fp;
    if curv > 0.0 {
        (0.5 * (fm - fp) / curv).clamp(-1.0, 1.0)
    } else if fm < fp {
        -1.0
    } else if fp < fm {
        1.0
    } else {
        0.0
    }
}

fn refine_1d(den: &Denominator, mut u: f64, mut h: f64) -> f64 {
    let mut f0 = den.at(u, 0.0);
    while h > 1e-10 {
        let (a, b) = ((u - h).max(-1.0), (u + h).min(1.0));
        let (fm, fp) = (den.at(a, 0.0), den.at(b, 0.0));
        let cand = (u + h * parabola_offset(fm, f0, fp)).clamp(-1.0, 1.0);
        let fc = den.at(cand, 0.0);
        // keep the best sample seen so the denominator never increases
        for (x, f) in [(cand, fc), (a, fm), (b, fp)] {
            if f < f0 {
                u = x;
                f0 = f;
            }
        }
        h /= 4.0;
    }
    u
}

fn refine_2d(den: &Denominator, mut p: (f64, f64), mut h: f64) -> (f64, f64) {
    let clamp_disc = |(u, v): (f64, f64)| {
        let r = (u * u + v * v).sqrt();
        if r > 1.0 {
            (u / r, v / r)
        } else {
            (u, v)
        }
    };
    let mut f0 = den.at(p.0, p.1);
    while h > 1e-10 {
        let mut f = [[0.0; 3]; 3];
        for (i, row) in f.iter_mut().enumerate() {
            for (j, val) in row.iter_mut().enumerate() {
                let q = clamp_disc((p.0 + (i as f64 - 1.0) * h, p.1 + (j as f64 - 1.0) * h));
                *val = den.at(q.0, q.1);
            }
        }
        // least-squares quadratic on the 3x3 stencil, coordinates in steps
        let (mut b, mut c, mut e, mut d2u, mut d2v) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (i, row) in f.iter().enumerate() {
            for (j, val) in row.iter().enumerate() {
                let (x, y) = (i as f64 - 1.0, j as f64 - 1.0);
                b += x * val / 6.0;
                c += y * val / 6.0;
                e += x * y * val / 4.0;
                d2u += (x * x - 2.0 / 3.0) * val / 2.0;
                d2v += (y * y - 2.0 / 3.0) * val / 2.0;
            }
        }
        let (haa, hab, hbb) = (2.0 * d2u, e, 2.0 * d2v);
        let det = haa * hbb - hab * hab;
        let mut cands = Vec::with_capacity(10);
        if haa > 0.0 && det > 0.0 {
            let su = (-(hbb * b) + hab * c) / det;
            let sv = (hab * b - haa * c) / det;
            cands.push(clamp_disc((p.0 + su.clamp(-1.0, 1.0) * h, p.1 + sv.clamp(-1.0, 1.0) * h)));
        }
        for (i, row) in f.iter().enumerate() {
            for (j, val) in row.iter().enumerate() {
                if *val < f0 {
                    let q = clamp_disc((p.0 + (i as f64 - 1.0) * h, p.1 + (j as f64 - 1.0) * h));
                    f0 = *val;
                    p = q;
                }
            }
        }
        for q in cands {
            let fq = den.at(q.0, q.1);
            if fq < f0 {
                f0 = fq;
                p = q;
            }
        }
        h /= 4.0;
    }
    p
}

/// Options for the grid search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MusicOptions {
    /// Grid step; `None` selects 1e-3 for linear and 4e-3 for planar arrays.
    pub grid_step: Option<f64>,
    pub refine: bool,
}

impl Default for MusicOptions {
    fn default() -> Self {
        Self {
            grid_step: None,
            refine: true,
        }
    }
}

pub const DEFAULT_STEP_1D: f64 = 1e-3;
pub const DEFAULT_STEP_2D: f64 = 4e-3;

impl MusicOptions {
    pub fn step_for(&self, planar: bool) -> f64 {
        self.grid_step
            .unwrap_or(if planar { DEFAULT_STEP_2D } else { DEFAULT_STEP_1D })
    }
}

/// MUSIC over `u` in `[-1, 1]` for a linear array.
pub fn music_1d(block: &SnapshotBlock, grid_step: f64, refine: bool) -> Result<MusicSpectrum> {
    let ArrayGeometry::Linear(g) = &block.geometry else {
        return Err(Error::Unsupported("music_1d needs a linear array".into()));
    };
    let decomp = decompose(block);
    let den = Denominator::new(&decomp, g.positions(), vec![0.0; g.len()], block.scene.wavelength);
    spectrum(&den, AngleGrid::linear(grid_step)?, grid_step, refine)
}

/// MUSIC over the unit disc `u^2 + v^2 <= 1` for a planar array.
pub fn music_2d(block: &SnapshotBlock, grid_step: f64, refine: bool) -> Result<MusicSpectrum> {
    let ArrayGeometry::Planar(g) = &block.geometry else {
        return Err(Error::Unsupported("music_2d needs a planar array".into()));
    };
    let decomp = decompose(block);
    let den = Denominator::new(&decomp, g.xs(), g.ys().to_vec(), block.scene.wavelength);
    spectrum(&den, AngleGrid::planar(grid_step)?, grid_step, refine)
}

/// Dispatches on the array kind.
pub fn music(block: &SnapshotBlock, options: &MusicOptions) -> Result<MusicSpectrum> {
    let planar = block.geometry.is_planar();
    let step = options.step_for(planar);
    if planar {
        music_2d(block, step, options.refine)
    } else {
        music_1d(block, step, options.refine)
    }
}

fn spectrum(den: &Denominator, grid: AngleGrid, step: f64, refine: bool) -> Result<MusicSpectrum> {
    let d = den.grid(&grid);
    let best = argmin_admissible(&grid, &d);
    let peak = grid.point(best);
    let spacing = match &grid {
        AngleGrid::Linear { u } | AngleGrid::Planar { u, .. } => (u[1] - u[0]).min(step.max(1e-12)),
    };
    let estimate = match (&grid, refine) {
        (_, false) => peak,
        (AngleGrid::Linear { .. }, true) => (refine_1d(den, peak.0, spacing), 0.0),
        (AngleGrid::Planar { .. }, true) => refine_2d(den, peak, spacing),
    };
    Ok(MusicSpectrum {
        values: d.into_iter().map(pseudo).collect(),
        grid,
        peak,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{Geometry1D, Geometry2D, SensingScene, SpatialAngles};
    use crate::estimation::synth::synthesize;

    fn noiseless(angles: SpatialAngles, g: ArrayGeometry) -> SnapshotBlock {
        let mut scene = SensingScene::with_snr_db(angles, 20.0, 0.5).unwrap();
        scene.noise_power = 0.0;
        synthesize(&scene, &g, 11).unwrap()
    }

    #[test]
    fn orthogonality_at_truth() {
        let g: ArrayGeometry = Geometry1D::new(vec![0.0, 0.5, 1.0, 9.0, 9.5, 10.0]).unwrap().into();
        let b = noiseless(SpatialAngles::from_u(0.71).unwrap(), g.clone());
        let dec = decompose(&b);
        let a = DVector::from_vec(g.steering(0.71, 0.0, 1.0).unwrap());
        let proj = dec.noise.adjoint() * &a;
        assert!(proj.norm_squared() < 1e-10);
        let gram = dec.noise.adjoint() * &dec.noise;
        assert!((gram - DMatrix::identity(5, 5)).norm() < 1e-10);
    }

    #[test]
    fn flat_covariance_is_degenerate() {
        let scene = SensingScene::with_snr_db(SpatialAngles::from_u(0.0).unwrap(), 0.0, 0.5).unwrap();
        let g: ArrayGeometry = Geometry1D::new(vec![0.0, 1.0, 2.0]).unwrap().into();
        let mut b = synthesize(&scene, &g, 0).unwrap();
        b.y = DMatrix::identity(3, 3);
        assert!(decompose(&b).degenerate);
    }

    #[test]
    fn linear_peak_and_shift_invariance() {
        let g = Geometry1D::new(vec![0.0, 0.5, 1.0, 9.0, 9.5, 10.0]).unwrap();
        let b = noiseless(SpatialAngles::from_u(0.71).unwrap(), g.clone().into());
        let s = music_1d(&b, 1e-3, true).unwrap();
        assert!((s.estimate.0 - 0.71).abs() < 1e-6, "{:?}", s.estimate);

        let shifted = noiseless(SpatialAngles::from_u(0.71).unwrap(), g.translated(3.3).into());
        let s2 = music_1d(&shifted, 1e-3, false).unwrap();
        for (a, c) in s.values.iter().zip(&s2.values).step_by(37) {
            let (da, dc) = (1.0 / a, 1.0 / c);
            assert!((da - dc).abs() < 1e-9, "{da} {dc}");
        }
    }

    #[test]
    fn planar_rotation() {
        let g = Geometry2D::new(vec![0.0, 1.7, 0.3, 2.0, 1.1], vec![0.0, 0.2, 1.9, 1.4, 0.8]).unwrap();
        let b = noiseless(SpatialAngles::new(0.3, -0.5).unwrap(), g.clone().into());
        let s = music_2d(&b, 0.02, true).unwrap();
        assert!((s.estimate.0 - 0.3).abs() < 1e-6 && (s.estimate.1 + 0.5).abs() < 1e-6);
        // rotating the array by +90 degrees maps the direction (u, v) to (-v, u)
        let r = noiseless(SpatialAngles::new(0.5, 0.3).unwrap(), g.rotated_quarter_turn().into());
        let sr = music_2d(&r, 0.02, true).unwrap();
        assert!((sr.estimate.0 - 0.5).abs() < 1e-6 && (sr.estimate.1 - 0.3).abs() < 1e-6);
    }
}
