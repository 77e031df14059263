//! Rayleigh block-fading channels, the CSI-error model, and the per-relay
//! quantities the selection and rotation logic run on.

use num_complex::Complex64;

use crate::math::{sample_cn, wrap_angle, ComplexVec, RngStream};
use crate::{Error, Result};

/// Source-to-relay channel vectors for every relay, `h_k` from source 1 and
/// `g_k` from source 2, plus optional noisy estimates of both.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    h: Vec<ComplexVec>,
    g: Vec<ComplexVec>,
    estimate: Option<(Vec<ComplexVec>, Vec<ComplexVec>)>,
}

impl ChannelSet {
    /// Builds a set from explicit vectors; relay `k` gets `h[k]`, `g[k]`.
    pub fn from_vectors(h: Vec<ComplexVec>, g: Vec<ComplexVec>) -> Result<Self> {
        if h.is_empty() || h.len() != g.len() {
            return Err(Error::Config("need one (h, g) pair per relay, at least one relay".into()));
        }
        if h.iter().zip(&g).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::Config("h_k and g_k must have equal lengths".into()));
        }
        Ok(Self { h, g, estimate: None })
    }

    pub fn relays(&self) -> usize {
        self.h.len()
    }

    pub fn layout(&self) -> Vec<usize> {
        self.h.iter().map(|v| v.len()).collect()
    }

    /// True channels.
    pub fn h(&self, k: usize) -> &ComplexVec {
        &self.h[k]
    }

    pub fn g(&self, k: usize) -> &ComplexVec {
        &self.g[k]
    }

    pub fn has_estimate(&self) -> bool {
        self.estimate.is_some()
    }

    /// Channel view available to the selection/rotation/beamforming logic:
    /// the corrupted copies when present, the true channels otherwise.
    pub fn h_view(&self, k: usize) -> &ComplexVec {
        match &self.estimate {
            Some((h, _)) => &h[k],
            None => &self.h[k],
        }
    }

    pub fn g_view(&self, k: usize) -> &ComplexVec {
        match &self.estimate {
            Some((_, g)) => &g[k],
            None => &self.g[k],
        }
    }

    /// Every entry multiplied by a per-relay unit-modulus factor, one for
    /// `h_k` and one for `g_k`.
    pub fn rotated(&self, h_phase: &[f64], g_phase: &[f64]) -> ChannelSet {
        let rot = |vs: &[ComplexVec], ph: &[f64]| {
            vs.iter()
                .zip(ph)
                .map(|(v, &p)| v.scale(Complex64::from_polar(1.0, p)))
                .collect::<Vec<_>>()
        };
        ChannelSet {
            h: rot(&self.h, h_phase),
            g: rot(&self.g, g_phase),
            estimate: self
                .estimate
                .as_ref()
                .map(|(h, g)| (rot(h, h_phase), rot(g, g_phase))),
        }
    }
}

/// Draws i.i.d. `CN(0, 1)` channels for the given antenna layout.
pub fn sample_channels(layout: &[usize], rng: &mut RngStream) -> Result<ChannelSet> {
    if layout.is_empty() {
        return Err(Error::Config("relay layout is empty".into()));
    }
    if layout.contains(&0) {
        return Err(Error::Config("every relay needs at least one antenna".into()));
    }
    let mut h = Vec::with_capacity(layout.len());
    let mut g = Vec::with_capacity(layout.len());
    for &lk in layout {
        h.push(sample_cn(rng, lk, 1.0));
        g.push(sample_cn(rng, lk, 1.0));
    }
    Ok(ChannelSet { h, g, estimate: None })
}

/// Adds independent `CN(0, delta2)` estimation error to every coefficient.
/// `delta2 = 0` leaves the set without an estimate, so every consumer sees
/// the exact channels.
pub fn corrupt_csi(ch: &ChannelSet, delta2: f64, rng: &mut RngStream) -> Result<ChannelSet> {
    if !(delta2 >= 0.0) || !delta2.is_finite() {
        return Err(Error::Config(format!("CSI error variance must be >= 0, got {delta2}")));
    }
    if delta2 == 0.0 {
        return Ok(ChannelSet { estimate: None, ..ch.clone() });
    }
    let mut noisy = |vs: &[ComplexVec]| -> Vec<ComplexVec> {
        vs.iter()
            .map(|v| ComplexVec::from_raw(v.iter().map(|z| z + rng.cn(delta2)).collect()))
            .collect()
    };
    let h_est = noisy(&ch.h);
    let g_est = noisy(&ch.g);
    Ok(ChannelSet { h: ch.h.clone(), g: ch.g.clone(), estimate: Some((h_est, g_est)) })
}

/// Effective angle `angle(h^H g)` in `[0, 2pi)`; `0` when the inner product
/// vanishes relative to `|h||g|`.
pub fn effective_angle(h: &ComplexVec, g: &ComplexVec) -> f64 {
    let ip = h.inner(g);
    if ip.norm() < 1e-12 * h.norm() * g.norm() || ip.norm() == 0.0 {
        return 0.0;
    }
    wrap_angle(ip.arg())
}

/// Per-relay selection quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayMetrics {
    /// Effective angle.
    pub phi: f64,
    /// MaxMin gain `min(|h|^2, |g|^2)`.
    pub gamma: f64,
    pub h_gain: f64,
    pub g_gain: f64,
    /// `min(|h_l|^2, |g_l|^2)` per antenna.
    pub antenna_mins: Vec<f64>,
}

impl RelayMetrics {
    pub fn of(h: &ComplexVec, g: &ComplexVec) -> Self {
        let h_gain = h.norm_sqr();
        let g_gain = g.norm_sqr();
        let antenna_mins = h
            .iter()
            .zip(g.iter())
            .map(|(a, b)| a.norm_sqr().min(b.norm_sqr()))
            .collect();
        Self { phi: effective_angle(h, g), gamma: h_gain.min(g_gain), h_gain, g_gain, antenna_mins }
    }

    /// Sum of per-antenna minima; never exceeds `gamma`.
    pub fn antenna_min_sum(&self) -> f64 {
        self.antenna_mins.iter().sum()
    }

    pub fn best_antenna_min(&self) -> f64 {
        self.antenna_mins.iter().copied().fold(0.0, f64::max)
    }
}

/// Metrics for every relay, computed on the selection-side channel view.
pub fn relay_metrics(ch: &ChannelSet) -> Vec<RelayMetrics> {
    (0..ch.relays()).map(|k| RelayMetrics::of(ch.h_view(k), ch.g_view(k))).collect()
}
