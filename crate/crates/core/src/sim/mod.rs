//! Monte Carlo signal chain: unipolar frames, AWGN, receivers with genie-aided
//! successive cancellation, and sample estimates of the second-order statistics
//! behind the closed-form rates.
//!
//! Frames are generated in fixed blocks of [`BLOCK_FRAMES`]; block `b` draws from
//! ChaCha8 stream `b` of the run's seed, so every estimate depends only on
//! `(seed, frames)` and not on the number of worker threads.

pub mod dft;
pub mod estimate;
pub mod modulate;
pub mod receiver;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dft::{unitary_dft, unitary_idft, Dft, SpectrumBlock};
pub use estimate::{
    check_autocorrelation, estimate_moments, predicted_snr_e, AutocorrReport, ClassEstimate, ClipEstimate,
    LagCheck, MomentEstimate,
};
pub use modulate::{modulate, Component, Loading, Modulated, Modulator};
pub use receiver::{demodulate_single, flip_combine, genie_sic_demodulate, pm_combine, Observation};

/// Frames per RNG stream.
pub const BLOCK_FRAMES: usize = 25;
/// Smallest frame count accepted by [`estimate_moments`].
pub const MIN_FRAMES: usize = 1000;
/// Smallest simulated subcarrier count.
pub const MIN_N: usize = 64;

/// Simulation size and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimParams {
    pub n: usize,
    pub frames: usize,
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self { n: 256, frames: 10_000, seed: 1 }
    }
}

impl SimParams {
    pub fn new(n: usize, frames: usize, seed: u64) -> Result<Self> {
        Self::check_n(n)?;
        Ok(Self { n, frames, seed })
    }

    pub(crate) fn check_n(n: usize) -> Result<()> {
        if n >= MIN_N && n.is_power_of_two() {
            Ok(())
        } else {
            Err(Error::Divisibility(format!("N must be a power of two >= {MIN_N}, got {n}")))
        }
    }

    /// Generator for frame block `block`.
    pub fn block_rng(&self, block: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(block as u64);
        rng
    }

    pub fn blocks(&self) -> usize {
        self.frames.div_ceil(BLOCK_FRAMES)
    }

    /// Frames in block `block`.
    pub fn block_len(&self, block: usize) -> usize {
        BLOCK_FRAMES.min(self.frames - block * BLOCK_FRAMES)
    }
}

/// Transmitted optical intensity samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub samples: Vec<f64>,
    /// Every sample is `>= 0`.
    pub nonneg: bool,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}
