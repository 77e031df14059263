//! One end-to-end two-way relaying round.
//!
//! MA stage: both sources send at once, source 1 rotated by `u1`, and the
//! selected relay runs joint ML detection over `S x S` before forming the
//! network-coded symbol. BC stage: the relay beamforms the network-coded
//! symbol with the phase-rotation beamformer, each source detects it with
//! a scalar ML detector and XORs out its own symbol.
//!
//! Symbols are carried as bit labels into the [`Constellation`].

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::math::{ComplexVec, RngStream};
use crate::modem::Constellation;
use crate::phy::{corrupt_csi, effective_angle, sample_channels, ChannelSet};
use crate::selection::{select, Scheme, SelectionDecision};
use crate::{Error, Result};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Source rotations `u1 = exp(j(upsilon + phi))`, `u2 = 1`.
pub fn pr_preprocess(phi: f64, upsilon: f64) -> (Complex64, Complex64) {
    (Complex64::from_polar(1.0, upsilon + phi), ONE)
}

/// Rotations actually applied under `scheme`; unrotated schemes send
/// `(1, 1)` whatever the effective angle.
pub fn source_rotations(scheme: Scheme, phi: f64, upsilon: f64) -> (Complex64, Complex64) {
    if scheme.rotates_sources() {
        pr_preprocess(phi, upsilon)
    } else {
        (ONE, ONE)
    }
}

/// `y = h x1 + g x2 + n`, `n ~ CN(0, sigma2 I)`.
pub fn ma_receive(
    h: &ComplexVec,
    g: &ComplexVec,
    x1: Complex64,
    x2: Complex64,
    sigma2: f64,
    rng: &mut RngStream,
) -> ComplexVec {
    assert_eq!(h.len(), g.len());
    ComplexVec::from_raw(
        h.iter()
            .zip(g.iter())
            .map(|(a, b)| a * x1 + b * x2 + rng.cn(sigma2))
            .collect(),
    )
}

/// Relay-side joint decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaResult {
    pub s1_hat: usize,
    pub s2_hat: usize,
    pub s_nc_hat: usize,
}

impl MaResult {
    pub fn relay_error(&self, s_nc: usize) -> bool {
        self.s_nc_hat != s_nc
    }
}

/// Exhaustive ML multi-user detection. Minimises
/// `|y - sqrt(ps) h u1 s1 - sqrt(ps) g u2 s2|^2` over all label pairs; the
/// lowest `(s1, s2)` in lexicographic order wins ties.
pub fn ml_mud(
    y: &ComplexVec,
    h: &ComplexVec,
    g: &ComplexVec,
    u1: Complex64,
    u2: Complex64,
    ps: f64,
    c: &Constellation,
) -> MaResult {
    let amp = ps.sqrt();
    let a = h.scale(amp * u1);
    let b = g.scale(amp * u2);
    let pts = c.points();
    // residual after removing the first user's candidate, reused over s2
    let mut resid = vec![Complex64::new(0.0, 0.0); y.len()];
    let mut best = (0, 0, f64::INFINITY);
    for (i, &p1) in pts.iter().enumerate() {
        for (r, (yl, al)) in resid.iter_mut().zip(y.iter().zip(a.iter())) {
            *r = yl - al * p1;
        }
        for (jdx, &p2) in pts.iter().enumerate() {
            let metric: f64 = resid.iter().zip(b.iter()).map(|(r, bl)| (r - bl * p2).norm_sqr()).sum();
            if metric < best.2 {
                best = (i, jdx, metric);
            }
        }
    }
    MaResult { s1_hat: best.0, s2_hat: best.1, s_nc_hat: Constellation::xor_labels(best.0, best.1) }
}

/// MA-stage decision distance `|g u2 d1 + h u1 d2|`, with the pairing of
/// channels to differences exactly as in the decision-distance definition.
pub fn dd_ma(h: &ComplexVec, g: &ComplexVec, u1: Complex64, u2: Complex64, d1: Complex64, d2: Complex64) -> f64 {
    assert_eq!(h.len(), g.len());
    h.iter()
        .zip(g.iter())
        .map(|(hl, gl)| (gl * u2 * d1 + hl * u1 * d2).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Thin QR of `[h g]`: `h = r11 q1`, `g = r12 q1 + r22 q2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QrFactors {
    pub q1: ComplexVec,
    pub q2: ComplexVec,
    pub r11: f64,
    pub r12: Complex64,
    pub r22: f64,
}

/// Classical Gram-Schmidt on `(h, g)`.
pub fn gram_schmidt(h: &ComplexVec, g: &ComplexVec) -> Result<QrFactors> {
    if h.len() < 2 || h.len() != g.len() {
        return Err(Error::Domain("Gram-Schmidt needs two equal-length vectors of length >= 2".into()));
    }
    let r11 = h.norm();
    if r11 == 0.0 {
        return Err(Error::DegenerateChannel("h is the zero vector".into()));
    }
    let ip = h.inner(g);
    let r12 = ip / r11;
    let residual = g.axpy(-ip / (r11 * r11), h);
    let r22 = residual.norm();
    if r22 < 1e-12 * g.norm() || r22 == 0.0 {
        return Err(Error::DegenerateChannel("g is parallel to h".into()));
    }
    let q1 = h.scale(Complex64::new(1.0 / r11, 0.0));
    let q2 = residual.scale(Complex64::new(1.0 / r22, 0.0));
    Ok(QrFactors { q1, q2, r11, r12, r22 })
}

/// Relay transmit weights for the BC stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub w: ComplexVec,
    /// Gram-Schmidt factors, absent for single-antenna relays and for the
    /// parallel-channel fallback.
    pub factors: Option<QrFactors>,
    pub fallback: bool,
}

impl Beamformer {
    /// Gains `(|w^T h|^2, |w^T g|^2)`.
    pub fn branch_gains(&self, h: &ComplexVec, g: &ComplexVec) -> (f64, f64) {
        (self.w.dot_t(h).norm_sqr(), self.w.dot_t(g).norm_sqr())
    }
}

/// Phase-rotation beamformer `w = sqrt(1/2) (exp(-j phi) q1^* + j q2^*)`,
/// which delivers exactly half of each channel's energy to each source.
/// Single-antenna relays transmit with `w = 1`.
pub fn pr_beamform(h: &ComplexVec, g: &ComplexVec, phi: f64) -> Result<Beamformer> {
    if h.len() == 1 {
        return Ok(Beamformer { w: ComplexVec::from_raw(vec![ONE]), factors: None, fallback: false });
    }
    let f = gram_schmidt(h, g)?;
    let rot = Complex64::from_polar(FRAC_1_SQRT_2, -phi);
    let jj = J * FRAC_1_SQRT_2;
    let w = ComplexVec::from_raw(
        f.q1.iter().zip(f.q2.iter()).map(|(a, b)| rot * a.conj() + jj * b.conj()).collect(),
    );
    Ok(Beamformer { w, factors: Some(f), fallback: false })
}

/// [`pr_beamform`], falling back to the single-direction beam
/// `w = exp(-j phi) q1^*` when `g` is parallel to `h`.
pub fn pr_beamform_or_fallback(h: &ComplexVec, g: &ComplexVec, phi: f64) -> Beamformer {
    match pr_beamform(h, g, phi) {
        Ok(bf) => bf,
        Err(_) => {
            let n = h.norm();
            let w = if n > 0.0 {
                h.conj().scale(Complex64::from_polar(1.0 / n, -phi))
            } else {
                let mut e = vec![Complex64::new(0.0, 0.0); h.len()];
                e[0] = ONE;
                ComplexVec::from_raw(e)
            };
            Beamformer { w, factors: None, fallback: true }
        }
    }
}

/// Outcome of the broadcast stage. Index 0 is source 1, index 1 source 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BcResult {
    /// Network-coded symbol as detected at each source.
    pub detected: [usize; 2],
    /// `recovered[i]` is the estimate of source `i`'s symbol made at the
    /// other source.
    pub recovered: [usize; 2],
    /// Detection error against the relay's broadcast symbol.
    pub bc_errors: [bool; 2],
    /// End-to-end error of source `i`'s symbol.
    pub e2e_errors: [bool; 2],
}

/// Broadcast of `s_nc_hat` with beamformer `bf`; `sources` are the true
/// source labels.
#[allow(clippy::too_many_arguments)]
pub fn bc_round(
    bf: &Beamformer,
    h: &ComplexVec,
    g: &ComplexVec,
    s_nc_hat: usize,
    sources: [usize; 2],
    pr: f64,
    sigma2: f64,
    c: &Constellation,
    rng: &mut RngStream,
) -> BcResult {
    bc_round_with_detector_csi(bf, (h, g), (h, g), s_nc_hat, sources, pr, sigma2, c, rng)
}

/// [`bc_round`] where the source detectors assume `detector` channels while
/// the signal propagates over `true_ch`.
#[allow(clippy::too_many_arguments)]
pub fn bc_round_with_detector_csi(
    bf: &Beamformer,
    true_ch: (&ComplexVec, &ComplexVec),
    detector: (&ComplexVec, &ComplexVec),
    s_nc_hat: usize,
    sources: [usize; 2],
    pr: f64,
    sigma2: f64,
    c: &Constellation,
    rng: &mut RngStream,
) -> BcResult {
    let amp = pr.sqrt();
    let x = c.point(s_nc_hat);
    let y1 = amp * bf.w.dot_t(true_ch.0) * x + rng.cn(sigma2);
    let y2 = amp * bf.w.dot_t(true_ch.1) * x + rng.cn(sigma2);
    let det1 = c.detect(y1, amp * bf.w.dot_t(detector.0));
    let det2 = c.detect(y2, amp * bf.w.dot_t(detector.1));
    // source 1 recovers s2 from its own detection, and vice versa
    let rec2 = Constellation::xor_labels(det1, sources[0]);
    let rec1 = Constellation::xor_labels(det2, sources[1]);
    BcResult {
        detected: [det1, det2],
        recovered: [rec1, rec2],
        bc_errors: [det1 != s_nc_hat, det2 != s_nc_hat],
        e2e_errors: [rec1 != sources[0], rec2 != sources[1]],
    }
}

/// Where noisy CSI is consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CsiScope {
    /// Selection, rotation and beamforming only; detectors know the channel.
    #[default]
    Selection,
    /// Detectors also run on the noisy estimates.
    All,
}

/// A resolved link configuration: everything [`run_trial`] needs besides
/// the SNR and the random stream.
#[derive(Debug, Clone)]
pub struct Link {
    pub scheme: Scheme,
    pub layout: Vec<usize>,
    pub constellation: Constellation,
    /// Relay-to-source power ratio `P_r / P_s`.
    pub p: f64,
    pub upsilon: f64,
    pub delta2: f64,
    pub sigma2: f64,
    pub csi_scope: CsiScope,
}

/// Per-trial error flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub relay_error: bool,
    pub bc_errors: [bool; 2],
    pub e2e_errors: [bool; 2],
}

impl TrialOutcome {
    pub fn e2e_count(&self) -> u64 {
        self.e2e_errors.iter().filter(|&&e| e).count() as u64
    }

    pub fn bc_count(&self) -> u64 {
        self.bc_errors.iter().filter(|&&e| e).count() as u64
    }
}

/// Channels of the selected relay (or antenna): `(h, g)` true and as seen
/// by the selection logic.
struct SelectedLink {
    h: ComplexVec,
    g: ComplexVec,
    h_view: ComplexVec,
    g_view: ComplexVec,
}

fn selected_link(ch: &ChannelSet, d: &SelectionDecision) -> SelectedLink {
    let k = d.relay;
    match d.antenna {
        None => SelectedLink {
            h: ch.h(k).clone(),
            g: ch.g(k).clone(),
            h_view: ch.h_view(k).clone(),
            g_view: ch.g_view(k).clone(),
        },
        Some(l) => {
            let pick = |v: &ComplexVec| ComplexVec::from_raw(vec![v[l]]);
            SelectedLink {
                h: pick(ch.h(k)),
                g: pick(ch.g(k)),
                h_view: pick(ch.h_view(k)),
                g_view: pick(ch.g_view(k)),
            }
        }
    }
}

/// One symbol exchange at linear SNR `mu = P_s / sigma2` over fresh
/// channels: draw channels, corrupt CSI, select, rotate, MA stage, network
/// coding, beamform, BC stage.
pub fn run_trial(link: &Link, mu: f64, rng: &mut RngStream) -> Result<TrialOutcome> {
    let ch = sample_channels(&link.layout, rng)?;
    let ch = if link.delta2 > 0.0 { corrupt_csi(&ch, link.delta2, rng)? } else { ch };
    Ok(run_on_channels(link, &ch, mu, rng))
}

/// The transmission part of [`run_trial`] over given channels.
pub fn run_on_channels(link: &Link, ch: &ChannelSet, mu: f64, rng: &mut RngStream) -> TrialOutcome {
    let c = &link.constellation;
    let decision = select(link.scheme, ch);
    let sel = selected_link(ch, &decision);

    let phi = effective_angle(&sel.h_view, &sel.g_view);
    let (u1, u2) = source_rotations(link.scheme, phi, link.upsilon);

    let s1 = rng.index(c.size());
    let s2 = rng.index(c.size());
    let s_nc = Constellation::xor_labels(s1, s2);

    let ps = mu * link.sigma2;
    let amp = ps.sqrt();
    let y = ma_receive(&sel.h, &sel.g, amp * u1 * c.point(s1), amp * u2 * c.point(s2), link.sigma2, rng);
    let (h_det, g_det) = match link.csi_scope {
        CsiScope::Selection => (&sel.h, &sel.g),
        CsiScope::All => (&sel.h_view, &sel.g_view),
    };
    let ma = ml_mud(&y, h_det, g_det, u1, u2, ps, c);

    let bf = pr_beamform_or_fallback(&sel.h_view, &sel.g_view, phi);
    let bc = bc_round_with_detector_csi(
        &bf,
        (&sel.h, &sel.g),
        (h_det, g_det),
        ma.s_nc_hat,
        [s1, s2],
        link.p * ps,
        link.sigma2,
        c,
        rng,
    );
    TrialOutcome { relay_error: ma.relay_error(s_nc), bc_errors: bc.bc_errors, e2e_errors: bc.e2e_errors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::sample_cn;
    use crate::modem::{c3, difference_set, optimize_upsilon, Modulation};
    use crate::phy::relay_metrics;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn cv(pairs: &[(f64, f64)]) -> ComplexVec {
        ComplexVec::from_pairs(pairs)
    }

    /// Independent brute force with reversed iteration order; returns the
    /// minimum metric.
    fn brute_force_metric(
        y: &ComplexVec,
        h: &ComplexVec,
        g: &ComplexVec,
        u1: Complex64,
        u2: Complex64,
        ps: f64,
        c: &Constellation,
    ) -> (f64, Vec<(usize, usize)>) {
        let m = c.size();
        let mut metrics = Vec::new();
        for j in (0..m).rev() {
            for i in (0..m).rev() {
                let mut acc = 0.0;
                for l in 0..y.len() {
                    let r = y[l] - ps.sqrt() * h[l] * u1 * c.point(i) - ps.sqrt() * g[l] * u2 * c.point(j);
                    acc += r.norm_sqr();
                }
                metrics.push(((i, j), acc));
            }
        }
        let best = metrics.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        let argmins = metrics.iter().filter(|x| x.1 == best).map(|x| x.0).collect();
        (best, argmins)
    }

    fn metric(y: &ComplexVec, h: &ComplexVec, g: &ComplexVec, u1: Complex64, u2: Complex64, ps: f64, c: &Constellation, i: usize, j: usize) -> f64 {
        (0..y.len())
            .map(|l| (y[l] - ps.sqrt() * (h[l] * u1 * c.point(i) + g[l] * u2 * c.point(j))).norm_sqr())
            .sum()
    }

    #[test]
    fn preprocess_examples() {
        assert_eq!(pr_preprocess(0.0, 0.0), (ONE, ONE));
        let (u1, u2) = pr_preprocess(0.3, FRAC_PI_2);
        assert!((u1 - Complex64::from_polar(1.0, FRAC_PI_2 + 0.3)).norm() < 1e-15);
        assert_eq!(u2, ONE);
        assert_eq!(source_rotations(Scheme::MaxMinRsNoPr, 1.7, FRAC_PI_2), (ONE, ONE));
    }

    #[test]
    fn noiseless_receive() {
        let h = cv(&[(1.0, 2.0), (0.5, -1.0)]);
        let g = cv(&[(-0.3, 0.1), (2.0, 0.0)]);
        let x1 = Complex64::new(0.7, 0.7);
        let x2 = Complex64::new(-1.0, 0.0);
        let y = ma_receive(&h, &g, x1, x2, 0.0, &mut RngStream::new(0, 0));
        for l in 0..2 {
            assert!((y[l] - (h[l] * x1 + g[l] * x2)).norm() < 1e-15);
        }
    }

    #[test]
    fn receive_noise_power() {
        let mut rng = RngStream::new(1, 1);
        let h = cv(&[(1.0, 0.0), (0.0, 1.0), (0.5, 0.5)]);
        let g = cv(&[(0.2, 0.0), (1.0, 1.0), (0.0, -1.0)]);
        let n = 100_000;
        let sigma2 = 0.3;
        let zero = Complex64::new(0.0, 0.0);
        let mut acc = 0.0;
        for _ in 0..n {
            acc += ma_receive(&h, &g, zero, zero, sigma2, &mut rng).norm_sqr();
        }
        let p = acc / n as f64;
        assert!((p - 3.0 * sigma2).abs() < 0.01 * 3.0 * sigma2, "{p}");
    }

    #[test]
    fn noiseless_mud_recovers_everything() {
        let mut rng = RngStream::new(2, 0);
        for m in [Modulation::Bpsk, Modulation::Qpsk, Modulation::Mpam(4), Modulation::Mpsk(8)] {
            let c = Constellation::new(m).unwrap();
            for _ in 0..200 {
                let h = sample_cn(&mut rng, 2, 1.0);
                let g = sample_cn(&mut rng, 2, 1.0);
                let (u1, u2) = pr_preprocess(effective_angle(&h, &g), 0.4);
                for s1 in 0..c.size() {
                    for s2 in 0..c.size() {
                        let y = ma_receive(&h, &g, 2.0 * u1 * c.point(s1), 2.0 * u2 * c.point(s2), 0.0, &mut rng);
                        let r = ml_mud(&y, &h, &g, u1, u2, 4.0, &c);
                        assert_eq!((r.s1_hat, r.s2_hat), (s1, s2));
                        assert_eq!(r.s_nc_hat, s1 ^ s2);
                    }
                }
            }
        }
    }

    #[test]
    fn bpsk_both_flip_ambiguity_keeps_the_network_code() {
        let c = Constellation::new(Modulation::Bpsk).unwrap();
        let one = cv(&[(1.0, 0.0)]);
        let y = cv(&[(0.0, 0.0)]);
        let (_, argmins) = brute_force_metric(&y, &one, &one, ONE, ONE, 1.0, &c);
        assert_eq!(argmins.len(), 2);
        let r = ml_mud(&y, &one, &one, ONE, ONE, 1.0, &c);
        assert_eq!((r.s1_hat, r.s2_hat), (0, 1));
        // (+1,-1) and (-1,+1) share the same network-coded symbol
        for (i, j) in argmins {
            assert_eq!(i ^ j, r.s_nc_hat);
        }
    }

    #[test]
    fn dd_examples() {
        let h = cv(&[(1.0, 0.5), (0.2, -1.0)]);
        let g = cv(&[(0.3, 0.0), (-2.0, 1.0)]);
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(dd_ma(&h, &g, ONE, ONE, z, z), 0.0);
        let d1 = Complex64::new(0.0, 2.0);
        assert!((dd_ma(&h, &g, ONE, ONE, d1, z) - 2.0 * g.norm()).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_examples() {
        let f = gram_schmidt(&cv(&[(1.0, 0.0), (0.0, 0.0)]), &cv(&[(0.0, 0.0), (1.0, 0.0)])).unwrap();
        assert_eq!((f.r11, f.r12, f.r22), (1.0, Complex64::new(0.0, 0.0), 1.0));
        assert_eq!(f.q1, cv(&[(1.0, 0.0), (0.0, 0.0)]));
        assert_eq!(f.q2, cv(&[(0.0, 0.0), (1.0, 0.0)]));

        let f = gram_schmidt(&cv(&[(1.0, 0.0), (0.0, 0.0)]), &cv(&[(0.0, 1.0), (1.0, 0.0)])).unwrap();
        assert!((f.r12 - J).norm() < 1e-15);
        assert!((f.r22 - 1.0).abs() < 1e-15);
        assert!((f.q2[1] - ONE).norm() < 1e-15 && f.q2[0].norm() < 1e-15);
    }

    #[test]
    fn gram_schmidt_degenerate() {
        let h = cv(&[(1.0, 1.0), (2.0, 0.0)]);
        let g = h.scale(Complex64::new(0.0, -3.0));
        assert!(matches!(gram_schmidt(&h, &g), Err(Error::DegenerateChannel(_))));
        assert!(matches!(pr_beamform(&h, &g, 0.0), Err(Error::DegenerateChannel(_))));
        let phi = effective_angle(&h, &g);
        let bf = pr_beamform_or_fallback(&h, &g, phi);
        assert!(bf.fallback);
        assert!((bf.w.norm() - 1.0).abs() < 1e-12);
        let (gh, gg) = bf.branch_gains(&h, &g);
        let gamma = h.norm_sqr().min(g.norm_sqr());
        assert!(gh.min(gg) >= gamma / 2.0);
    }

    #[test]
    fn beamformer_example() {
        let h = cv(&[(1.0, 0.0), (0.0, 0.0)]);
        let g = cv(&[(0.0, 0.0), (1.0, 0.0)]);
        let phi = effective_angle(&h, &g);
        assert_eq!(phi, 0.0);
        let bf = pr_beamform(&h, &g, phi).unwrap();
        assert!((bf.w[0] - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((bf.w[1] - Complex64::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        let (gh, gg) = bf.branch_gains(&h, &g);
        assert!((gh - 0.5).abs() < 1e-15 && (gg - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_antenna_beam_is_unity() {
        let h = cv(&[(0.3, -0.4)]);
        let g = cv(&[(1.0, 1.0)]);
        let bf = pr_beamform(&h, &g, 1.0).unwrap();
        let (gh, gg) = bf.branch_gains(&h, &g);
        assert!((gh.min(gg) - h.norm_sqr().min(g.norm_sqr())).abs() < 1e-15);
    }

    #[test]
    fn noiseless_bc_delivers_the_relay_symbol() {
        let c = Constellation::new(Modulation::Qpsk).unwrap();
        let mut rng = RngStream::new(5, 0);
        let h = sample_cn(&mut rng, 3, 1.0);
        let g = sample_cn(&mut rng, 3, 1.0);
        let bf = pr_beamform(&h, &g, effective_angle(&h, &g)).unwrap();
        for s1 in 0..4 {
            for s2 in 0..4 {
                let r = bc_round(&bf, &h, &g, s1 ^ s2, [s1, s2], 2.0, 0.0, &c, &mut rng);
                assert_eq!(r.detected, [s1 ^ s2, s1 ^ s2]);
                assert_eq!(r.e2e_errors, [false, false]);
                // a wrong relay decision propagates to both directions
                let wrong = (s1 ^ s2) ^ 1;
                let r = bc_round(&bf, &h, &g, wrong, [s1, s2], 2.0, 0.0, &c, &mut rng);
                assert_eq!(r.bc_errors, [false, false]);
                assert_eq!(r.e2e_errors, [true, true]);
            }
        }
    }

    #[test]
    fn bpsk_single_antenna_bc_ser_matches_antipodal_tail() {
        let c = Constellation::new(Modulation::Bpsk).unwrap();
        let h = cv(&[(0.6, -0.3)]);
        let g = cv(&[(1.0, 0.2)]);
        let (p, mu) = (2.0, 1.5);
        let bf = pr_beamform(&h, &g, 0.0).unwrap();
        let mut rng = RngStream::new(6, 0);
        let n = 200_000;
        let mut errs = 0u64;
        for t in 0..n {
            let s = t % 2;
            let r = bc_round(&bf, &h, &g, s, [s, 0], p * mu, 1.0, &c, &mut rng);
            errs += r.bc_errors[0] as u64;
        }
        let sim = errs as f64 / n as f64;
        let theory = crate::math::q_function((2.0 * p * mu * h.norm_sqr()).sqrt());
        let sd = (theory * (1.0 - theory) / n as f64).sqrt();
        assert!((sim - theory).abs() < 4.0 * sd, "sim {sim} theory {theory}");
    }

    #[test]
    fn high_snr_trials_are_error_free() {
        for (scheme, m, layout) in [
            (Scheme::PrMaxMinRs, Modulation::Mpam(4), vec![1, 1, 1, 1]),
            (Scheme::MaxMinRsNoPr, Modulation::Qpsk, vec![2, 2]),
            (Scheme::MaxMinAs, Modulation::Bpsk, vec![3]),
        ] {
            let c = Constellation::new(m).unwrap();
            let link = Link {
                scheme,
                layout,
                upsilon: optimize_upsilon(&c),
                constellation: c,
                p: 1.0,
                delta2: 0.0,
                sigma2: 1.0,
                csi_scope: CsiScope::Selection,
            };
            let mut rng = RngStream::new(9, 0);
            let mu = 1e6;
            let mut errs = 0;
            for _ in 0..20_000 {
                errs += run_trial(&link, mu, &mut rng).unwrap().e2e_count();
            }
            assert_eq!(errs, 0, "{scheme}");
        }
    }

    proptest! {
        #[test]
        fn mud_agrees_with_brute_force(seed in 0u64..10_000, mi in 0usize..4) {
            let m = [Modulation::Bpsk, Modulation::Qpsk, Modulation::Mpam(4), Modulation::Mpsk(8)][mi];
            let c = Constellation::new(m).unwrap();
            let mut rng = RngStream::new(seed, 77);
            let h = sample_cn(&mut rng, 2, 1.0);
            let g = sample_cn(&mut rng, 2, 1.0);
            let (u1, u2) = pr_preprocess(effective_angle(&h, &g), 0.3);
            let s1 = rng.index(c.size());
            let s2 = rng.index(c.size());
            let y = ma_receive(&h, &g, u1 * c.point(s1), u2 * c.point(s2), 0.5, &mut rng);
            let r = ml_mud(&y, &h, &g, u1, u2, 1.0, &c);
            let (best, argmins) = brute_force_metric(&y, &h, &g, u1, u2, 1.0, &c);
            let got = metric(&y, &h, &g, u1, u2, 1.0, &c, r.s1_hat, r.s2_hat);
            prop_assert!((got - best).abs() <= 1e-12 * (1.0 + best));
            prop_assert!(argmins.contains(&(r.s1_hat, r.s2_hat)));
        }

        #[test]
        fn beamformer_splits_energy_evenly(seed in 0u64..10_000, l in 2usize..9) {
            let mut rng = RngStream::new(seed, 5);
            let h = sample_cn(&mut rng, l, 1.0);
            let g = sample_cn(&mut rng, l, 1.0);
            let bf = pr_beamform(&h, &g, effective_angle(&h, &g)).unwrap();
            prop_assert!((bf.w.norm() - 1.0).abs() < 1e-10);
            let f = bf.factors.as_ref().unwrap();
            prop_assert!(f.q1.inner(&f.q2).norm() < 1e-10);
            prop_assert!((f.q1.norm() - 1.0).abs() < 1e-12 && (f.q2.norm() - 1.0).abs() < 1e-12);
            prop_assert!((h.norm_sqr() - f.r11 * f.r11).abs() < 1e-10 * h.norm_sqr());
            prop_assert!((g.norm_sqr() - f.r12.norm_sqr() - f.r22 * f.r22).abs() < 1e-10 * g.norm_sqr());
            let rec_g = f.q1.scale(f.r12).axpy(Complex64::new(f.r22, 0.0), &f.q2);
            prop_assert!(rec_g.sub(&g).norm() < 1e-10);
            let (gh, gg) = bf.branch_gains(&h, &g);
            prop_assert!((gh - h.norm_sqr() / 2.0).abs() < 1e-9 * h.norm_sqr());
            prop_assert!((gg - g.norm_sqr() / 2.0).abs() < 1e-9 * g.norm_sqr());
        }

        #[test]
        fn prop1_bound_holds_after_rotation(seed in 0u64..10_000, mi in 0usize..3) {
            let m = [Modulation::Qpsk, Modulation::Mpam(4), Modulation::Mpsk(8)][mi];
            let c = Constellation::new(m).unwrap();
            let d = difference_set(&c);
            let ups = optimize_upsilon(&c);
            let c3v = c3(ups, &d);
            let ch = sample_channels(&[3], &mut RngStream::new(seed, 6)).unwrap();
            let gamma = relay_metrics(&ch)[0].gamma;
            let (u1, u2) = pr_preprocess(effective_angle(ch.h(0), ch.g(0)), ups);
            let lb = c3v * gamma * d.d_min().powi(2);
            for t in d.transitions() {
                let lam = dd_ma(ch.h(0), ch.g(0), u1, u2, t.d1, t.d2);
                prop_assert!(lam * lam >= lb - 1e-12 * (1.0 + lb));
            }
        }

        #[test]
        fn scalar_detector_is_rotation_invariant(seed in 0u64..5000, theta in 0.0f64..6.28) {
            let c = Constellation::new(Modulation::Mpsk(8)).unwrap();
            let mut rng = RngStream::new(seed, 8);
            let y = rng.cn(1.0);
            let gain = rng.cn(1.0);
            let r = Complex64::from_polar(1.0, theta);
            prop_assert_eq!(c.detect(y, gain), c.detect(y * r, gain * r));
        }
    }
}
