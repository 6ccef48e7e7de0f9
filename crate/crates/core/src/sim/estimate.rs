//! Pooled sample moments over many frames.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dft::{Dft, SpectrumBlock};
use super::modulate::{Loading, Modulated, Modulator};
use super::receiver::{demodulate_single, genie_sic_demodulate, Observation};
use super::{SimParams, MIN_FRAMES};
use crate::channel::ChannelSpec;
use crate::clipstats::symmetric_clip_moments;
use crate::error::{Error, Result};
use crate::scheme::SchemeConfig;

/// Estimates for one class of observations (one component's subcarriers).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEstimate {
    pub component: usize,
    /// Observations are real (imaginary parts only).
    pub real: bool,
    /// Independent channels of this class per frame.
    pub channels_per_frame: usize,
    /// `Re E[Y conj(X)] / E[|X|^2]`.
    pub alpha_hat: f64,
    pub alpha_se: f64,
    pub delta_hat: f64,
    pub delta_se: f64,
    /// `delta / (1 - delta)`.
    pub snr_e_hat: f64,
    pub snr_e_se: f64,
    /// `E[|Y|^2] - |E[Y conj(X)]|^2 / E[|X|^2]`: noise plus distortion per observation.
    pub residual_power: f64,
    pub residual_se: f64,
}

/// Estimates for one clipper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipEstimate {
    pub component: usize,
    pub alpha_theory: f64,
    /// `E[c x] / E[x^2]`.
    pub alpha_hat: f64,
    /// `E[c^2] - E[c x]^2 / E[x^2]`.
    pub d2_hat: f64,
    pub d2_se: f64,
    /// Mean of `sum_n d_n x_n` per frame over its standard error, `d = c - alpha_theory x`.
    pub orth_time_z: f64,
    /// Same for `sum_k Re(D_k conj(X_k))`.
    pub orth_freq_z: f64,
    /// Distortion power off the allowed bin stride relative to on it.
    pub leakage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    /// Of the last class (the DCO component where there is one).
    pub alpha_hat: f64,
    pub alpha_se: f64,
    /// Of the last component's clipper, zero when it has none.
    pub d2_hat: f64,
    pub d2_se: f64,
    pub delta_hat: f64,
    pub delta_se: f64,
    pub snr_e_hat: Vec<ClassEstimate>,
    pub clippers: Vec<ClipEstimate>,
    pub mean_power: f64,
    pub mean_power_se: f64,
    pub min_sample: f64,
    pub all_nonneg: bool,
    pub frames: usize,
    pub seed: u64,
    pub n: usize,
    pub frame_len: usize,
}

impl MomentEstimate {
    /// Rate in bits per channel use implied by the measured SNRs,
    /// each channel treated as Gaussian at its `snr_e_hat`.
    pub fn rate_proxy(&self) -> f64 {
        self.snr_e_hat
            .iter()
            .map(|c| {
                let dof = if c.real { 0.5 } else { 1.0 };
                dof * c.channels_per_frame as f64 * c.snr_e_hat.max(0.0).ln_1p() / std::f64::consts::LN_2
            })
            .sum::<f64>()
            / self.frame_len as f64
    }
}

#[derive(Debug, Clone, Default)]
struct ClassAcc {
    yx: Complex64,
    xx: f64,
    yy: f64,
    count: usize,
}

impl ClassAcc {
    fn add(&mut self, o: &Self) {
        self.yx += o.yx;
        self.xx += o.xx;
        self.yy += o.yy;
        self.count += o.count;
    }

    fn alpha(&self) -> f64 {
        if self.xx > 0.0 { self.yx.re / self.xx } else { 0.0 }
    }

    fn delta(&self) -> f64 {
        if self.xx > 0.0 && self.yy > 0.0 { self.yx.norm_sqr() / (self.xx * self.yy) } else { 0.0 }
    }

    fn residual(&self) -> f64 {
        let c = self.count.max(1) as f64;
        if self.xx > 0.0 { (self.yy - self.yx.norm_sqr() / self.xx) / c } else { self.yy / c }
    }
}

#[derive(Debug, Clone, Default)]
struct ClipAcc {
    cx: f64,
    xx: f64,
    cc: f64,
    count: usize,
    time_sum: f64,
    time_sq: f64,
    freq_sum: f64,
    freq_sq: f64,
    frames: usize,
    allowed: f64,
    forbidden: f64,
    alpha_theory: f64,
    stride: Option<usize>,
}

impl ClipAcc {
    fn add(&mut self, o: &Self) {
        self.cx += o.cx;
        self.xx += o.xx;
        self.cc += o.cc;
        self.count += o.count;
        self.time_sum += o.time_sum;
        self.time_sq += o.time_sq;
        self.freq_sum += o.freq_sum;
        self.freq_sq += o.freq_sq;
        self.frames += o.frames;
        self.allowed += o.allowed;
        self.forbidden += o.forbidden;
        self.alpha_theory = o.alpha_theory;
        self.stride = o.stride;
    }

    fn alpha(&self) -> f64 {
        if self.xx > 0.0 { self.cx / self.xx } else { 0.0 }
    }

    fn d2(&self) -> f64 {
        let c = self.count.max(1) as f64;
        let explained = if self.xx > 0.0 { self.cx * self.cx / self.xx } else { 0.0 };
        ((self.cc - explained) / c).max(0.0)
    }
}

#[derive(Debug, Clone, Default)]
struct BlockAcc {
    classes: Vec<ClassAcc>,
    clips: Vec<ClipAcc>,
    sum: f64,
    samples: usize,
    min: f64,
}

impl BlockAcc {
    fn add(&mut self, o: &Self) {
        if self.classes.is_empty() && self.clips.is_empty() && self.samples == 0 {
            *self = o.clone();
            return;
        }
        self.classes.iter_mut().zip(&o.classes).for_each(|(a, b)| a.add(b));
        self.clips.iter_mut().zip(&o.clips).for_each(|(a, b)| a.add(b));
        self.sum += o.sum;
        self.samples += o.samples;
        self.min = self.min.min(o.min);
    }

    fn mean(&self) -> f64 {
        self.sum / self.samples.max(1) as f64
    }
}

fn se(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let b = v.len() as f64;
    if v.len() < 2 {
        return f64::NAN;
    }
    let m = v.iter().sum::<f64>() / b;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (b - 1.0) / b).sqrt()
}

fn z_score(sum: f64, sq: f64, frames: usize) -> f64 {
    let f = frames as f64;
    let mean = sum / f;
    let var = (sq / f - mean * mean).max(0.0) * f / (f - 1.0);
    let se = (var / f).sqrt();
    if se > 0.0 { mean / se } else { 0.0 }
}

fn accumulate_class(acc: &mut ClassAcc, obs: &Observation, symbols: &[SpectrumBlock]) {
    for (block, ys) in symbols.iter().zip(&obs.blocks) {
        for (&k, y) in obs.bins.iter().zip(ys) {
            let x = block.symbols[k];
            match obs.loading {
                Loading::Complex => {
                    acc.yx += y * x.conj();
                    acc.xx += x.norm_sqr();
                    acc.yy += y.norm_sqr();
                }
                Loading::Imaginary => {
                    acc.yx += Complex64::new(y.im * x.im, 0.0);
                    acc.xx += x.im * x.im;
                    acc.yy += y.im * y.im;
                }
            }
            acc.count += 1;
        }
    }
}

fn accumulate_clip(acc: &mut ClipAcc, clip: &super::modulate::Clipping, block: &SpectrumBlock, dft: &Dft) {
    let mut time = 0.0;
    for (x, c) in clip.input.iter().zip(&clip.output) {
        acc.cx += c * x;
        acc.xx += x * x;
        acc.cc += c * c;
        time += (c - clip.alpha * x) * x;
    }
    acc.count += clip.input.len();
    let d: Vec<f64> = clip.input.iter().zip(&clip.output).map(|(x, c)| c - clip.alpha * x).collect();
    let spec = dft.forward_real(&d).expect("block length");
    let freq: f64 = spec.iter().zip(&block.symbols).map(|(dk, xk)| (dk * xk.conj()).re).sum();
    if let Some(stride) = clip.confined_stride {
        for (k, dk) in spec.iter().enumerate() {
            if k % stride == 0 {
                acc.allowed += dk.norm_sqr();
            } else {
                acc.forbidden += dk.norm_sqr();
            }
        }
    }
    acc.time_sum += time;
    acc.time_sq += time * time;
    acc.freq_sum += freq;
    acc.freq_sq += freq * freq;
    acc.frames += 1;
    acc.alpha_theory = clip.alpha;
    acc.stride = clip.confined_stride;
}

fn run_block(modulator: &Modulator, ch: &ChannelSpec, params: &SimParams, block: usize) -> BlockAcc {
    let cfg = modulator.config();
    let n = modulator.n();
    let mut rng = params.block_rng(block);
    let mut acc = BlockAcc { min: f64::INFINITY, ..Default::default() };
    for _ in 0..params.block_len(block) {
        let Modulated { frame, components } = modulator.generate(&mut rng);
        let received: Vec<f64> = frame
            .samples
            .iter()
            .map(|s| s + ch.sigma_z() * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let observations = if cfg.kind().is_multiplexed() {
            let genie: Vec<Vec<f64>> = components.iter().map(|c| c.signal.clone()).collect();
            genie_sic_demodulate(cfg, n, &received, &genie)
        } else {
            demodulate_single(cfg, n, &received)
        }
        .expect("frame matches its own configuration");

        if acc.classes.is_empty() {
            acc.classes = vec![ClassAcc::default(); observations.len()];
            acc.clips = vec![ClipAcc::default(); components.iter().map(|c| c.clippings.len()).sum()];
        }
        for (a, obs) in acc.classes.iter_mut().zip(&observations) {
            accumulate_class(a, obs, &components[obs.component].symbols);
        }
        let clips = components.iter().flat_map(|c| c.clippings.iter().zip(&c.symbols));
        for (a, (clip, block)) in acc.clips.iter_mut().zip(clips) {
            accumulate_clip(a, clip, block, modulator.dft());
        }
        acc.sum += frame.samples.iter().sum::<f64>();
        acc.samples += frame.samples.len();
        acc.min = frame.samples.iter().copied().fold(acc.min, f64::min);
    }
    acc
}

/// Component owning each clipper, in accumulation order.
fn clip_owners(cfg: &SchemeConfig) -> Vec<usize> {
    match cfg {
        SchemeConfig::Dco { .. } | SchemeConfig::Aco | SchemeConfig::PamDmt => vec![0],
        SchemeConfig::Flip | SchemeConfig::Pm | SchemeConfig::EuOfdm { .. } => vec![],
        SchemeConfig::Ado { .. } | SchemeConfig::Haco { .. } => vec![0, 1],
        SchemeConfig::Asco { .. } => vec![0, 0],
        SchemeConfig::FdmUofdm { lambdas } => (0..lambdas.len()).collect(),
    }
}

/// Runs `params.frames` frames through the channel and receiver and estimates
/// the Bussgang gain, distortion power, `Delta` and per-class SNRs. Moments are
/// pooled across frames before any ratio is taken; standard errors come from
/// the spread of the per-block estimates.
pub fn estimate_moments(cfg: &SchemeConfig, ch: &ChannelSpec, params: &SimParams) -> Result<MomentEstimate> {
    if params.frames < MIN_FRAMES {
        return Err(Error::InsufficientFrames { required: MIN_FRAMES, actual: params.frames });
    }
    let modulator = Modulator::new(cfg, ch, params.n)?;
    let blocks: Vec<BlockAcc> =
        (0..params.blocks()).into_par_iter().map(|b| run_block(&modulator, ch, params, b)).collect();
    let mut total = BlockAcc::default();
    for b in &blocks {
        total.add(b);
    }

    let owners = clip_owners(cfg);
    let n = params.n;
    let classes: Vec<ClassEstimate> = total
        .classes
        .iter()
        .enumerate()
        .map(|(i, acc)| {
            let component = i;
            let per_block = |f: &dyn Fn(&ClassAcc) -> f64| se(blocks.iter().map(|b| f(&b.classes[i])));
            let snr = |a: &ClassAcc| {
                let d = a.delta();
                d / (1.0 - d)
            };
            let delta = acc.delta();
            ClassEstimate {
                component,
                real: modulator.loading()[component] == Loading::Imaginary,
                channels_per_frame: acc.count / params.frames,
                alpha_hat: acc.alpha(),
                alpha_se: per_block(&|a| a.alpha()),
                delta_hat: delta,
                delta_se: per_block(&|a| a.delta()),
                snr_e_hat: delta / (1.0 - delta),
                snr_e_se: per_block(&snr),
                residual_power: acc.residual(),
                residual_se: per_block(&|a| a.residual()),
            }
        })
        .collect();
    let clippers: Vec<ClipEstimate> = total
        .clips
        .iter()
        .enumerate()
        .map(|(j, acc)| ClipEstimate {
            component: owners[j],
            alpha_theory: acc.alpha_theory,
            alpha_hat: acc.alpha(),
            d2_hat: acc.d2(),
            d2_se: se(blocks.iter().map(|b| b.clips[j].d2())),
            orth_time_z: z_score(acc.time_sum, acc.time_sq, acc.frames),
            orth_freq_z: z_score(acc.freq_sum, acc.freq_sq, acc.frames),
            leakage: acc.stride.map(|_| if acc.allowed > 0.0 { acc.forbidden / acc.allowed } else { 0.0 }),
        })
        .collect();

    let last = classes.last().expect("every scheme has a component");
    let last_comp = cfg.components() - 1;
    let last_clip = owners.iter().rposition(|&o| o == last_comp);
    let (d2_hat, d2_se) = last_clip.map_or((0.0, 0.0), |j| (clippers[j].d2_hat, clippers[j].d2_se));
    Ok(MomentEstimate {
        alpha_hat: last.alpha_hat,
        alpha_se: last.alpha_se,
        d2_hat,
        d2_se,
        delta_hat: last.delta_hat,
        delta_se: last.delta_se,
        snr_e_hat: classes,
        clippers,
        mean_power: total.mean(),
        mean_power_se: se(blocks.iter().map(BlockAcc::mean)),
        min_sample: total.min,
        all_nonneg: total.min >= 0.0,
        frames: params.frames,
        seed: params.seed,
        n,
        frame_len: modulator.frame_len(),
    })
}

/// Per-class SNR the signal chain should measure at size `n`, using the same
/// `sigma_X` as the simulator. DCO clipping distortion is spread over all bins at
/// its time-domain power `E[d^2]`; in ADO-OFDM the DCO component only occupies
/// even bins, so its distortion stays there at twice that power per bin and the
/// odd (ACO) bins are distortion-free.
pub fn predicted_snr_e(cfg: &SchemeConfig, ch: &ChannelSpec, n: usize) -> Result<Vec<f64>> {
    let m = Modulator::new(cfg, ch, n)?;
    let s = m.sigmas();
    let nf = n as f64;
    let z2 = ch.sigma_z() * ch.sigma_z();
    let out = match cfg {
        SchemeConfig::Dco { .. } => {
            let cm = symmetric_clip_moments(s[0] * ((nf - 2.0) / nf).sqrt(), ch.eps());
            vec![cm.alpha * cm.alpha * s[0] * s[0] / (cm.d2 + z2)]
        }
        SchemeConfig::Aco | SchemeConfig::Pm => vec![s[0] * s[0] / (4.0 * z2)],
        SchemeConfig::PamDmt | SchemeConfig::Flip => vec![s[0] * s[0] / (2.0 * z2)],
        SchemeConfig::Ado { lambda, nu } => {
            let cm = symmetric_clip_moments(1.0 / (SQRT_2 * nu), lambda * ch.eps());
            vec![s[0] * s[0] / (4.0 * z2), cm.alpha * cm.alpha * s[1] * s[1] / (2.0 * cm.d2 + z2)]
        }
        SchemeConfig::Haco { .. } | SchemeConfig::Asco { .. } => {
            vec![s[0] * s[0] / (4.0 * z2), s[1] * s[1] / (2.0 * z2)]
        }
        SchemeConfig::FdmUofdm { .. } => s.iter().map(|v| v * v / (4.0 * z2)).collect(),
        SchemeConfig::EuOfdm { .. } => s
            .iter()
            .enumerate()
            .map(|(i, v)| 2f64.powi(i as i32) * v * v / (2.0 * z2))
            .collect(),
    };
    Ok(out)
}

/// One lag of the autocorrelation check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCheck {
    pub lag: usize,
    pub measured: f64,
    pub se: f64,
    /// `(N-2)/N sigma_X^2`, `0` or `-2 sigma_X^2 / N`.
    pub predicted: f64,
    /// Half of `predicted`, as the three-case formula is often quoted.
    pub halved: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocorrReport {
    pub n: usize,
    pub frames: usize,
    pub sigma_big: f64,
    pub lags: Vec<LagCheck>,
    pub pass: bool,
}

/// Tolerance of the autocorrelation check in standard errors.
pub const AUTOCORR_Z: f64 = 5.0;

/// Sample autocorrelation of real signals whose spectrum is Hermitian i.i.d.
/// `CN(0, sigma_big^2)` on bins `1..N/2` (zero at `0` and `N/2`), for lags 0..=4.
pub fn check_autocorrelation(params: &SimParams, sigma_big: f64) -> Result<AutocorrReport> {
    SimParams::check_n(params.n)?;
    if params.frames < 2 {
        return Err(Error::InsufficientFrames { required: 2, actual: params.frames });
    }
    let n = params.n;
    let nf = n as f64;
    let lags = 5;
    let dft = Dft::new(n);
    let per_block: Vec<Vec<(f64, f64)>> = (0..params.blocks())
        .into_par_iter()
        .map(|b| {
            let mut rng = params.block_rng(b);
            let mut sums = vec![(0.0, 0.0); lags];
            for _ in 0..params.block_len(b) {
                let mut half = vec![Complex64::new(0.0, 0.0); n / 2];
                for v in half.iter_mut().skip(1) {
                    *v = super::modulate::icg(&mut rng, sigma_big);
                }
                let x = dft.inverse_real(&SpectrumBlock::hermitian_from_half(n, &half)).expect("plan length");
                for (lag, s) in sums.iter_mut().enumerate() {
                    let r = (0..n).map(|i| x[i] * x[(i + lag) % n]).sum::<f64>() / nf;
                    s.0 += r;
                    s.1 += r * r;
                }
            }
            sums
        })
        .collect();
    let f = params.frames as f64;
    let s2 = sigma_big * sigma_big;
    let checks: Vec<LagCheck> = (0..lags)
        .map(|lag| {
            let (sum, sq) = per_block.iter().fold((0.0, 0.0), |a, b| (a.0 + b[lag].0, a.1 + b[lag].1));
            let mean = sum / f;
            let se = ((sq / f - mean * mean).max(0.0) / (f - 1.0)).sqrt();
            let predicted = match lag {
                0 => (nf - 2.0) / nf * s2,
                l if l % 2 == 1 => 0.0,
                _ => -2.0 * s2 / nf,
            };
            let z = if se > 0.0 { (mean - predicted) / se } else { 0.0 };
            LagCheck { lag, measured: mean, se, predicted, halved: predicted / 2.0, z, pass: z.abs() <= AUTOCORR_Z }
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(AutocorrReport { n, frames: params.frames, sigma_big, lags: checks, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_few_frames() {
        let p = SimParams { n: 64, frames: 999, seed: 1 };
        assert_eq!(
            estimate_moments(&SchemeConfig::Aco, &ChannelSpec::from_snr_db(10.0), &p),
            Err(Error::InsufficientFrames { required: MIN_FRAMES, actual: 999 })
        );
    }

    #[test]
    fn block_partition_covers_frames() {
        let p = SimParams { n: 64, frames: 1010, seed: 1 };
        let total: usize = (0..p.blocks()).map(|b| p.block_len(b)).sum();
        assert_eq!(total, 1010);
        assert_eq!(p.block_len(p.blocks() - 1), 1010 % super::super::BLOCK_FRAMES);
    }
}
