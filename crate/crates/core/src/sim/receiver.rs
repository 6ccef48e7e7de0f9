//! Receivers: received frames to per-subcarrier observations.

use num_complex::Complex64;

use super::dft::Dft;
use super::modulate::{component_bins, component_loading, frame_len, Loading};
use crate::error::{Error, Result};
use crate::scheme::SchemeConfig;

/// Observations of one component on its information-bearing bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub component: usize,
    /// `Imaginary` observations carry information only in `im`.
    pub loading: Loading,
    pub bins: Vec<usize>,
    /// `blocks[b][i]` observes symbol `bins[i]` of the component's block `b`.
    pub blocks: Vec<Vec<Complex64>>,
}

/// `y_n = r_{P,n} - r_{N,n}` for a frame `[r_P, r_N]`.
pub fn flip_combine(frame: &[f64]) -> Vec<f64> {
    let (p, q) = frame.split_at(frame.len() / 2);
    p.iter().zip(q).map(|(a, b)| a - b).collect()
}

/// `y_n = r_{1,n} - r_{2,n} + j (r_{3,n} - r_{4,n})` for a frame `[r_1, r_2, r_3, r_4]`.
pub fn pm_combine(frame: &[f64]) -> Vec<Complex64> {
    let q = frame.len() / 4;
    (0..q)
        .map(|i| Complex64::new(frame[i] - frame[q + i], frame[2 * q + i] - frame[3 * q + i]))
        .collect()
}

fn pick(spec: &[Complex64], bins: &[usize]) -> Vec<Complex64> {
    bins.iter().map(|&k| spec[k]).collect()
}

struct Ctx<'a> {
    cfg: &'a SchemeConfig,
    n: usize,
    dft: Dft,
    bins: Vec<Vec<usize>>,
    loading: Vec<Loading>,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a SchemeConfig, n: usize, received: &[f64]) -> Result<Self> {
        cfg.check_size(n)?;
        let expected = frame_len(cfg, n);
        if received.len() != expected {
            return Err(Error::LengthMismatch { expected, actual: received.len() });
        }
        Ok(Self { cfg, n, dft: Dft::new(n), bins: component_bins(cfg, n), loading: component_loading(cfg) })
    }

    fn observe(&self, c: usize, blocks: Vec<Vec<Complex64>>) -> Observation {
        Observation { component: c, loading: self.loading[c], bins: self.bins[c].clone(), blocks }
    }

    fn real_block(&self, c: usize, y: &[f64]) -> Vec<Complex64> {
        pick(&self.dft.forward_real(y).expect("block length"), &self.bins[c])
    }

    /// Component `c` from `y`, which has had every earlier component removed.
    fn component(&self, c: usize, y: &[f64]) -> Observation {
        let n = self.n;
        match self.cfg {
            SchemeConfig::Flip => self.observe(c, vec![self.real_block(c, &flip_combine(y))]),
            SchemeConfig::Pm => {
                let mut buf = pm_combine(y);
                self.dft.forward_in_place(&mut buf).expect("block length");
                self.observe(c, vec![pick(&buf, &self.bins[c])])
            }
            SchemeConfig::Asco { .. } if c == 0 => {
                let blocks = y.chunks(n).map(|half| self.real_block(c, half)).collect();
                self.observe(c, blocks)
            }
            SchemeConfig::Asco { .. } => self.observe(c, vec![self.real_block(c, &flip_combine(y))]),
            SchemeConfig::EuOfdm { .. } => {
                // despread: average the 2^(l-1) copies of each half
                let reps = 1usize << c;
                let blocks = y
                    .chunks(2 * reps * n)
                    .map(|block| {
                        let mut acc = vec![0.0; n];
                        for (i, chunk) in block.chunks(n).enumerate() {
                            let sign = if i < reps { 1.0 } else { -1.0 };
                            acc.iter_mut().zip(chunk).for_each(|(a, v)| *a += sign * v);
                        }
                        acc.iter_mut().for_each(|a| *a /= reps as f64);
                        self.real_block(c, &acc)
                    })
                    .collect();
                self.observe(c, blocks)
            }
            _ => self.observe(c, vec![self.real_block(c, y)]),
        }
    }
}

/// Observations of a single-component scheme; for a multiplexed scheme, of its
/// first component without any cancellation.
pub fn demodulate_single(cfg: &SchemeConfig, n: usize, received: &[f64]) -> Result<Vec<Observation>> {
    let ctx = Ctx::new(cfg, n, received)?;
    Ok(vec![ctx.component(0, received)])
}

/// Observations of every component of a multiplexed scheme. Component `l` is read
/// after subtracting the true transmitted signals of components `0..l`, which
/// stands in for error-free decoding and re-modulation.
pub fn genie_sic_demodulate(
    cfg: &SchemeConfig,
    n: usize,
    received: &[f64],
    genie: &[Vec<f64>],
) -> Result<Vec<Observation>> {
    let ctx = Ctx::new(cfg, n, received)?;
    let comps = cfg.components();
    if !cfg.kind().is_multiplexed() {
        return Err(Error::Parameter(format!("{} has no components to cancel", cfg.kind())));
    }
    if genie.len() + 1 < comps {
        return Err(Error::MissingGenie(format!(
            "{} components need {} cancelled signals, got {}",
            comps,
            comps - 1,
            genie.len()
        )));
    }
    if let Some(bad) = genie.iter().take(comps - 1).find(|g| g.len() != received.len()) {
        return Err(Error::LengthMismatch { expected: received.len(), actual: bad.len() });
    }
    let mut y = received.to_vec();
    let mut out = Vec::with_capacity(comps);
    for c in 0..comps {
        out.push(ctx.component(c, &y));
        if c + 1 < comps {
            y.iter_mut().zip(&genie[c]).for_each(|(a, g)| *a -= g);
        }
    }
    Ok(out)
}
