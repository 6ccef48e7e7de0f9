//! Transmitters: frequency-domain Gaussian codewords to unipolar frames.
//!
//! Each component's `sigma_X` is fixed by requiring its mean optical power to be
//! exactly its share of the budget at the configured `N`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::dft::{Dft, SpectrumBlock};
use super::{Frame, SimParams};
use crate::channel::ChannelSpec;
use crate::error::{param, Result};
use crate::scheme::{SchemeConfig, SchemeKind};
use crate::special::erf;

/// A memoryless nonlinearity applied to one length-`N` bipolar Gaussian block.
#[derive(Debug, Clone, PartialEq)]
pub struct Clipping {
    pub input: Vec<f64>,
    /// Clipper output without any DC bias.
    pub output: Vec<f64>,
    /// Bussgang gain predicted for `input`'s distribution.
    pub alpha: f64,
    /// Distortion `output - alpha * input` lies only on multiples of this bin stride.
    pub confined_stride: Option<usize>,
}

/// One transmitted component of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// Recorded codeword symbols, one block per length-`N` transform.
    pub symbols: Vec<SpectrumBlock>,
    /// Contribution of this component to the frame (full frame length).
    pub signal: Vec<f64>,
    pub clippings: Vec<Clipping>,
}

/// A frame and the components it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulated {
    pub frame: Frame,
    pub components: Vec<Component>,
}

/// How the symbols of a component are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loading {
    /// `X_k ~ CN(0, sigma^2)`.
    Complex,
    /// `Re X_k = 0`, `Im X_k ~ N(0, sigma^2)`.
    Imaginary,
}

/// Frame length in samples.
pub fn frame_len(cfg: &SchemeConfig, n: usize) -> usize {
    match cfg {
        SchemeConfig::Flip | SchemeConfig::Asco { .. } => 2 * n,
        SchemeConfig::Pm => 4 * n,
        SchemeConfig::EuOfdm { lambdas } => n << lambdas.len(),
        _ => n,
    }
}

/// Information-bearing bins of each component (below `N/2`; PM uses all `N`).
pub fn component_bins(cfg: &SchemeConfig, n: usize) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (1..n / 2).collect();
    let odd: Vec<usize> = (1..n / 2).step_by(2).collect();
    let even: Vec<usize> = (2..n / 2).step_by(2).collect();
    match cfg {
        SchemeConfig::Dco { .. } | SchemeConfig::PamDmt | SchemeConfig::Flip => vec![all],
        SchemeConfig::Aco => vec![odd],
        SchemeConfig::Pm => vec![(0..n).collect()],
        SchemeConfig::Ado { .. } | SchemeConfig::Haco { .. } | SchemeConfig::Asco { .. } => vec![odd, even],
        SchemeConfig::FdmUofdm { lambdas } => (1..=lambdas.len())
            .map(|l| {
                let base = 1usize << (l - 1);
                (base..n / 2).step_by(2 * base).collect()
            })
            .collect(),
        SchemeConfig::EuOfdm { lambdas } => vec![all; lambdas.len()],
    }
}

/// Symbol loading of each component.
pub fn component_loading(cfg: &SchemeConfig) -> Vec<Loading> {
    match cfg {
        SchemeConfig::PamDmt => vec![Loading::Imaginary],
        SchemeConfig::Haco { .. } => vec![Loading::Complex, Loading::Imaginary],
        _ => vec![Loading::Complex; cfg.components()],
    }
}

/// Per-component symbol deviation `sigma_X` that spends exactly the component's
/// power share at size `n`.
pub fn component_sigmas(cfg: &SchemeConfig, ch: &ChannelSpec, n: usize) -> Vec<f64> {
    let eps = ch.eps();
    let nf = n as f64;
    let aco = |share: f64| share * (4.0 * PI).sqrt() * eps;
    match cfg {
        SchemeConfig::Dco { nu } => vec![1.0 / (SQRT_2 * nu)],
        SchemeConfig::Aco => vec![aco(1.0)],
        // nonzero samples have variance sigma_B^2; samples 0 and N/2 are zero
        SchemeConfig::PamDmt => vec![nf / (nf - 2.0) * (2.0 * PI).sqrt() * eps],
        SchemeConfig::Flip => vec![(nf / (nf - 2.0) * 2.0 * PI).sqrt() * eps],
        SchemeConfig::Pm => vec![(4.0 * PI).sqrt() * eps],
        SchemeConfig::Ado { lambda, nu } => {
            let sigma_x2 = 1.0 / (SQRT_2 * nu);
            vec![aco(1.0 - lambda), (2.0 * nf / (nf - 4.0)).sqrt() * sigma_x2]
        }
        // samples off multiples of N/4 have variance sigma_B^2 / 2
        SchemeConfig::Haco { lambda } => {
            vec![aco(1.0 - lambda), nf / (nf - 4.0) * 2.0 * PI.sqrt() * lambda * eps]
        }
        SchemeConfig::Asco { lambda } => {
            vec![aco(1.0 - lambda), (2.0 * nf / (nf - 4.0) * 2.0 * PI).sqrt() * lambda * eps]
        }
        SchemeConfig::FdmUofdm { lambdas } => lambdas
            .iter()
            .enumerate()
            .map(|(i, l)| (2f64.powi(i as i32 + 1) * 2.0 * PI).sqrt() * l * eps)
            .collect(),
        SchemeConfig::EuOfdm { lambdas } => {
            lambdas.iter().map(|l| (nf / (nf - 2.0) * 2.0 * PI).sqrt() * l * eps).collect()
        }
    }
}

/// Frame generator for one scheme, channel and size.
#[derive(Debug, Clone)]
pub struct Modulator {
    cfg: SchemeConfig,
    n: usize,
    eps: f64,
    dft: Dft,
    sigmas: Vec<f64>,
    bins: Vec<Vec<usize>>,
    loading: Vec<Loading>,
}

impl Modulator {
    pub fn new(cfg: &SchemeConfig, ch: &ChannelSpec, n: usize) -> Result<Self> {
        cfg.validate()?;
        SimParams::check_n(n)?;
        cfg.check_size(n)?;
        if cfg.kind() == SchemeKind::EuOfdm && cfg.components() > 8 {
            return param("eU-OFDM simulation supports at most 8 layers");
        }
        Ok(Self {
            cfg: cfg.clone(),
            n,
            eps: ch.eps(),
            dft: Dft::new(n),
            sigmas: component_sigmas(cfg, ch, n),
            bins: component_bins(cfg, n),
            loading: component_loading(cfg),
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frame_len(&self) -> usize {
        frame_len(&self.cfg, self.n)
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn bins(&self) -> &[Vec<usize>] {
        &self.bins
    }

    pub fn loading(&self) -> &[Loading] {
        &self.loading
    }

    pub(crate) fn dft(&self) -> &Dft {
        &self.dft
    }

    /// Draws a Hermitian block for component `c`.
    fn draw_block<R: Rng + ?Sized>(&self, c: usize, rng: &mut R) -> SpectrumBlock {
        let sigma = self.sigmas[c];
        let mut half = vec![Complex64::new(0.0, 0.0); self.n / 2];
        for &k in &self.bins[c] {
            half[k] = match self.loading[c] {
                Loading::Complex => icg(rng, sigma),
                Loading::Imaginary => Complex64::new(0.0, sigma * rng.sample::<f64, _>(StandardNormal)),
            };
        }
        SpectrumBlock::hermitian_from_half(self.n, &half)
    }

    fn bipolar<R: Rng + ?Sized>(&self, c: usize, rng: &mut R) -> (SpectrumBlock, Vec<f64>) {
        let block = self.draw_block(c, rng);
        let x = self.dft.inverse_real(&block).expect("block has plan length");
        (block, x)
    }

    /// ACO-style component on bins of component `c`: `s = max(x, 0)`.
    fn half_wave<R: Rng + ?Sized>(&self, c: usize, stride: Option<usize>, rng: &mut R) -> Component {
        let (block, x) = self.bipolar(c, rng);
        let s: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
        Component {
            symbols: vec![block],
            signal: s.clone(),
            clippings: vec![Clipping { input: x, output: s, alpha: 0.5, confined_stride: stride }],
        }
    }

    /// Symmetric clip at `+-level` plus a DC bias of `level`.
    fn biased_clip<R: Rng + ?Sized>(&self, c: usize, level: f64, sigma_x: f64, stride: Option<usize>, rng: &mut R) -> Component {
        let (block, x) = self.bipolar(c, rng);
        let clipped: Vec<f64> = x.iter().map(|v| v.clamp(-level, level)).collect();
        let alpha = if sigma_x > 0.0 { erf(level / (SQRT_2 * sigma_x)) } else { 0.0 };
        Component {
            symbols: vec![block],
            signal: clipped.iter().map(|v| v + level).collect(),
            clippings: vec![Clipping { input: x, output: clipped, alpha, confined_stride: stride }],
        }
    }

    /// Flip-style component: `[max(x, 0), max(-x, 0)]`, no distortion.
    fn flipped<R: Rng + ?Sized>(&self, c: usize, rng: &mut R) -> (SpectrumBlock, Vec<f64>, Vec<f64>) {
        let (block, x) = self.bipolar(c, rng);
        let pos = x.iter().map(|v| v.max(0.0)).collect();
        let neg = x.iter().map(|v| (-v).max(0.0)).collect();
        (block, pos, neg)
    }

    /// Builds one frame.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Modulated {
        let n = self.n;
        let nf = n as f64;
        let components = match &self.cfg {
            SchemeConfig::Dco { .. } => {
                let sigma_x = self.sigmas[0] * ((nf - 2.0) / nf).sqrt();
                vec![self.biased_clip(0, self.eps, sigma_x, None, rng)]
            }
            SchemeConfig::Aco => vec![self.half_wave(0, Some(2), rng)],
            SchemeConfig::PamDmt => vec![self.half_wave(0, None, rng)],
            SchemeConfig::Flip => {
                let (block, pos, neg) = self.flipped(0, rng);
                vec![Component { symbols: vec![block], signal: [pos, neg].concat(), clippings: vec![] }]
            }
            SchemeConfig::Pm => vec![self.pm_component(rng)],
            SchemeConfig::Ado { lambda, .. } => {
                let aco = self.half_wave(0, Some(2), rng);
                let sigma_x2 = self.sigmas[1] * ((nf - 4.0) / (2.0 * nf)).sqrt();
                let dco = self.biased_clip(1, lambda * self.eps, sigma_x2, Some(2), rng);
                vec![aco, dco]
            }
            SchemeConfig::Haco { .. } => vec![self.half_wave(0, Some(2), rng), self.half_wave(1, Some(2), rng)],
            SchemeConfig::Asco { .. } => {
                let a1 = self.half_wave(0, Some(2), rng);
                let a2 = self.half_wave(0, Some(2), rng);
                let (block, pos, neg) = self.flipped(1, rng);
                let aco = Component {
                    symbols: [a1.symbols, a2.symbols].concat(),
                    signal: [a1.signal, a2.signal].concat(),
                    clippings: [a1.clippings, a2.clippings].concat(),
                };
                let flip = Component { symbols: vec![block], signal: [pos, neg].concat(), clippings: vec![] };
                vec![aco, flip]
            }
            SchemeConfig::FdmUofdm { lambdas } => {
                (0..lambdas.len()).map(|c| self.half_wave(c, Some(2 << c), rng)).collect()
            }
            SchemeConfig::EuOfdm { lambdas } => {
                let layers = lambdas.len();
                (0..layers).map(|c| self.eu_layer(c, layers, rng)).collect()
            }
        };
        let len = self.frame_len();
        let mut samples = vec![0.0; len];
        for comp in &components {
            debug_assert_eq!(comp.signal.len(), len);
            samples.iter_mut().zip(&comp.signal).for_each(|(s, v)| *s += v);
        }
        let nonneg = samples.iter().all(|v| *v >= 0.0);
        Modulated { frame: Frame { samples, nonneg }, components }
    }

    fn pm_component<R: Rng + ?Sized>(&self, rng: &mut R) -> Component {
        let sigma = self.sigmas[0];
        let symbols: Vec<Complex64> = (0..self.n).map(|_| icg(rng, sigma)).collect();
        let block = SpectrumBlock { symbols, hermitian: false };
        let mut x = block.symbols.clone();
        self.dft.inverse_in_place(&mut x).expect("block has plan length");
        let part = |f: fn(&Complex64) -> f64| x.iter().map(f).collect::<Vec<f64>>();
        let signal = [
            part(|v| v.re.max(0.0)),
            part(|v| (-v.re).max(0.0)),
            part(|v| v.im.max(0.0)),
            part(|v| (-v.im).max(0.0)),
        ]
        .concat();
        Component { symbols: vec![block], signal, clippings: vec![] }
    }

    /// Layer `c` (zero-based) of an eU-OFDM frame: `2^(L-l)` Flip blocks whose
    /// halves are each repeated `2^(l-1)` times.
    fn eu_layer<R: Rng + ?Sized>(&self, c: usize, layers: usize, rng: &mut R) -> Component {
        let reps = 1usize << c;
        let blocks = 1usize << (layers - 1 - c);
        let mut symbols = Vec::with_capacity(blocks);
        let mut signal = Vec::with_capacity(self.frame_len());
        for _ in 0..blocks {
            let (block, pos, neg) = self.flipped(c, rng);
            symbols.push(block);
            for _ in 0..reps {
                signal.extend_from_slice(&pos);
            }
            for _ in 0..reps {
                signal.extend_from_slice(&neg);
            }
        }
        Component { symbols, signal, clippings: vec![] }
    }
}

/// `CN(0, sigma^2)` draw.
pub(crate) fn icg<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Complex64 {
    let s = sigma / SQRT_2;
    Complex64::new(s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal))
}

/// Builds one frame of `cfg` with `params.n` subcarriers.
pub fn modulate<R: Rng + ?Sized>(cfg: &SchemeConfig, ch: &ChannelSpec, params: &SimParams, rng: &mut R) -> Result<Modulated> {
    Ok(Modulator::new(cfg, ch, params.n)?.generate(rng))
}
