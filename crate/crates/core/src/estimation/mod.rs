//! Snapshot synthesis, MUSIC estimation, Monte Carlo error measurement and
//! steering-vector correlation maps.

mod correlation;
mod montecarlo;
mod music;
mod synth;

pub use correlation::{correlation, correlation_map, CorrelationMap};
pub use montecarlo::{monte_carlo_mse, TrialBatch};
pub use music::{
    decompose, music, music_1d, music_2d, AngleGrid, MusicOptions, MusicSpectrum,
    SubspaceDecomposition, DEFAULT_STEP_1D, DEFAULT_STEP_2D,
};
pub use synth::{synthesize, synthesize_stream, SnapshotBlock};
