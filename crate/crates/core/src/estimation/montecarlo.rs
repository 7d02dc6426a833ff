use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::music::{music, MusicOptions};
use super::synth::synthesize_stream;
use crate::array::{ArrayGeometry, SensingScene, SpatialAngles};
use crate::error::{Error, Result};

/// Per-trial estimates and the empirical mean squared errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialBatch {
    pub trials: usize,
    pub seed: u64,
    pub truth: SpatialAngles,
    pub estimates_u: Vec<f64>,
    /// `None` for linear arrays.
    pub estimates_v: Option<Vec<f64>>,
    pub mse_u: f64,
    pub mse_v: Option<f64>,
    /// Standard error of `mse_u`.
    pub se_u: f64,
    pub se_v: Option<f64>,
}

fn mse_and_se(est: &[f64], truth: f64) -> (f64, f64) {
    let sq: Vec<f64> = est.iter().map(|e| (e - truth).powi(2)).collect();
    let n = sq.len() as f64;
    let mean = sq.iter().sum::<f64>() / n;
    let se = if sq.len() > 1 {
        let var = sq.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    (mean, se)
}

/// Runs `trials` independent MUSIC estimates. Trial `i` draws from stream
/// `i` of `seed`, so results do not depend on scheduling.
pub fn monte_carlo_mse(
    scene: &SensingScene,
    geometry: &ArrayGeometry,
    trials: usize,
    seed: u64,
    options: &MusicOptions,
) -> Result<TrialBatch> {
    if trials == 0 {
        return Err(Error::Config("monte carlo needs at least one trial".into()));
    }
    let estimates: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let block = synthesize_stream(scene, geometry, seed, i)?;
            Ok(music(&block, options)?.estimate)
        })
        .collect::<Result<_>>()?;
    let us: Vec<f64> = estimates.iter().map(|e| e.0).collect();
    let (mse_u, se_u) = mse_and_se(&us, scene.angles.u);
    let (estimates_v, mse_v, se_v) = if geometry.is_planar() {
        let vs: Vec<f64> = estimates.iter().map(|e| e.1).collect();
        let (m, s) = mse_and_se(&vs, scene.angles.v);
        (Some(vs), Some(m), Some(s))
    } else {
        (None, None, None)
    };
    Ok(TrialBatch {
        trials,
        seed,
        truth: scene.angles,
        estimates_u: us,
        estimates_v,
        mse_u,
        mse_v,
        se_u,
        se_v,
    })
}
