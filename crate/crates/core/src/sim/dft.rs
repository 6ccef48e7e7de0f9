//! Unitary DFT with the `N^(-1/2)` normalization on both directions.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Length-`N` frequency-domain block.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumBlock {
    pub symbols: Vec<Complex64>,
    /// `symbols[N - k] == conj(symbols[k])`, so the inverse transform is real.
    pub hermitian: bool,
}

impl SpectrumBlock {
    /// Builds a Hermitian block from `half[k]`, `k = 1..N/2`; bins `0` and `N/2`
    /// are left at zero and `half[0]` is ignored.
    pub fn hermitian_from_half(n: usize, half: &[Complex64]) -> Self {
        debug_assert_eq!(half.len(), n / 2);
        let mut symbols = vec![Complex64::new(0.0, 0.0); n];
        for k in 1..n / 2 {
            symbols[k] = half[k];
            symbols[n - k] = half[k].conj();
        }
        Self { symbols, hermitian: true }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Largest violation of the Hermitian symmetry.
    pub fn hermitian_residue(&self) -> f64 {
        let n = self.symbols.len();
        (1..n)
            .map(|k| (self.symbols[n - k] - self.symbols[k].conj()).norm())
            .chain([self.symbols[0].im.abs()])
            .fold(0.0, f64::max)
    }
}

/// Forward and inverse plans for a fixed size.
#[derive(Clone)]
pub struct Dft {
    n: usize,
    scale: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Dft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dft").field("n", &self.n).finish()
    }
}

impl Dft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            scale: 1.0 / (n as f64).sqrt(),
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn check(&self, len: usize) -> Result<()> {
        if len == self.n {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.n, actual: len })
        }
    }

    /// `X_k = N^(-1/2) sum_n x_n exp(-j 2 pi k n / N)`, in place.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check(buf.len())?;
        self.forward.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) -> Result<()> {
        self.check(buf.len())?;
        self.inverse.process(buf);
        buf.iter_mut().for_each(|v| *v *= self.scale);
        Ok(())
    }

    pub fn forward_real(&self, x: &[f64]) -> Result<Vec<Complex64>> {
        self.check(x.len())?;
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut buf)?;
        Ok(buf)
    }

    /// Inverse transform of a Hermitian block, returning the real part.
    pub fn inverse_real(&self, block: &SpectrumBlock) -> Result<Vec<f64>> {
        let mut buf = block.symbols.clone();
        self.inverse_in_place(&mut buf)?;
        Ok(buf.into_iter().map(|v| v.re).collect())
    }
}

/// Unitary DFT of `x` at its own length.
pub fn unitary_dft(x: &[Complex64]) -> SpectrumBlock {
    let mut buf = x.to_vec();
    Dft::new(x.len()).forward_in_place(&mut buf).expect("length matches plan");
    let hermitian = x.iter().all(|v| v.im == 0.0);
    SpectrumBlock { symbols: buf, hermitian }
}

/// Inverse unitary DFT.
pub fn unitary_idft(block: &SpectrumBlock) -> Vec<Complex64> {
    let mut buf = block.symbols.clone();
    Dft::new(buf.len()).inverse_in_place(&mut buf).expect("length matches plan");
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn impulse_is_flat() {
        let mut x = vec![Complex64::new(0.0, 0.0); 64];
        x[0] = Complex64::new(1.0, 0.0);
        let b = unitary_dft(&x);
        assert!(b.symbols.iter().all(|v| (v - Complex64::new(0.125, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x: Vec<Complex64> = (0..128).map(|_| Complex64::new(rng.random(), rng.random())).collect();
            let b = unitary_dft(&x);
            assert!((norm(&x) / norm(&b.symbols) - 1.0).abs() < 1e-12);
            let back = unitary_idft(&b);
            assert!(x.iter().zip(&back).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }

    #[test]
    fn hermitian_block_gives_real_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let half: Vec<Complex64> = (0..32).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let block = SpectrumBlock::hermitian_from_half(64, &half);
        assert_eq!(block.hermitian_residue(), 0.0);
        let x = unitary_idft(&block);
        assert!(x.iter().all(|v| v.im.abs() < 1e-10));
    }

    #[test]
    fn wrong_length_is_rejected() {
        let dft = Dft::new(16);
        assert_eq!(
            dft.forward_real(&[0.0; 8]),
            Err(Error::LengthMismatch { expected: 16, actual: 8 })
        );
    }
}
