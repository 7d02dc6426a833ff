use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::array::{channel, ArrayGeometry, SensingScene, SignalModel};
use crate::error::Result;

/// Received snapshots `Y = h s^T + Z` (N x T) with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBlock {
    pub y: DMatrix<Complex64>,
    pub scene: SensingScene,
    pub geometry: ArrayGeometry,
    pub seed: u64,
    pub stream: u64,
    /// Phase of `beta` used for this block.
    pub beta_phase: f64,
}

/// Draws one block from stream 0 of `seed`.
pub fn synthesize(scene: &SensingScene, geometry: &ArrayGeometry, seed: u64) -> Result<SnapshotBlock> {
    synthesize_stream(scene, geometry, seed, 0)
}

/// Draws one block from an independent stream of `seed`. Draw order is the
/// path phase (if random), the `T` symbols, then the noise column by column.
pub fn synthesize_stream(
    scene: &SensingScene,
    geometry: &ArrayGeometry,
    seed: u64,
    stream: u64,
) -> Result<SnapshotBlock> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = geometry.len();
    let t = scene.snapshots;
    let beta_phase = match scene.beta_phase {
        Some(p) => p,
        None => rng.random_range(0.0..2.0 * PI),
    };
    let alpha = geometry.steering(scene.angles.u, scene.angles.v, scene.wavelength)?;
    let h = channel(scene.beta(beta_phase), &alpha);

    let p = scene.signal_power.max(0.0);
    let s: Vec<Complex64> = (0..t)
        .map(|_| match scene.signal_model {
            SignalModel::ConstantModulus => Complex64::from_polar(p.sqrt(), rng.random_range(0.0..2.0 * PI)),
            SignalModel::Gaussian => complex_normal(&mut rng, p),
        })
        .collect();
    let sigma2 = scene.noise_power.max(0.0);
    let mut y = DMatrix::from_fn(n, t, |r, c| h[r] * s[c]);
    for c in 0..t {
        for r in 0..n {
            y[(r, c)] += complex_normal(&mut rng, sigma2);
        }
    }
    Ok(SnapshotBlock {
        y,
        scene: scene.clone(),
        geometry: geometry.clone(),
        seed,
        stream,
        beta_phase,
    })
}

/// Circularly-symmetric complex Gaussian with `E|z|^2 = power`.
fn complex_normal(rng: &mut ChaCha8Rng, power: f64) -> Complex64 {
    let sd = (power / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}
