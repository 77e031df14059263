//! Closed-form SER bounds and the distribution of the selected channel.
//!
//! Notation: `G(z) = exp(-z) sum_{l<L} z^l / l!` is the tail of a
//! `Gamma(L, 1)` variable (the energy of an `L`-antenna Rayleigh channel),
//! `Gamma_k = min(|h_k|^2, |g_k|^2)` and `k^` the MaxMin-selected relay.
//!
//! MGFs use the decaying convention `psi(t) = E[exp(-t mu X)]`, with `X` the
//! selected relay's `|h|^2` and `mu` the SNR carried in [`MgfSpec`].

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::math::{binomial, factorial, gamma_fn, q_function, GaussLegendre};
use crate::modem::{c3, difference_set, Constellation, DifferenceSet, Modulation};
use crate::{Error, Result};

/// Constants of the end-to-end SER bound `alpha Q(sqrt(beta mu Gamma))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `|D| / M^2`.
    pub c4: f64,
    pub alpha: f64,
    pub beta: f64,
    pub d_min: f64,
}

impl BoundConstants {
    /// Constants for constellation `c` at rotation `upsilon`, power ratio `p`
    /// and relay antenna count `lk`.
    pub fn new(c: &Constellation, upsilon: f64, p: f64, lk: usize) -> Result<Self> {
        let d = difference_set(c);
        Self::from_difference_set(c, &d, upsilon, p, lk)
    }

    pub fn from_difference_set(c: &Constellation, d: &DifferenceSet, upsilon: f64, p: f64, lk: usize) -> Result<Self> {
        if lk == 0 {
            return Err(Error::Domain("relay needs at least one antenna".into()));
        }
        if p <= 0.0 || !p.is_finite() {
            return Err(Error::Domain(format!("power ratio must be positive, got {p}")));
        }
        let (c1, c2) = bc_constants(c)?;
        let c3v = c3(upsilon, d);
        let m2 = (c.size() * c.size()) as f64;
        let c4 = d.len() as f64 / m2;
        let d_min = d.d_min();
        let beta = (c3v * d_min * d_min / 2.0).min(c2 * p * bc_split(lk));
        Ok(BoundConstants { c1, c2, c3: c3v, c4, alpha: c4 + c1, beta, d_min })
    }
}

/// Fraction of the channel energy the beamformer delivers to each source.
fn bc_split(lk: usize) -> f64 {
    if lk == 1 {
        1.0
    } else {
        0.5
    }
}

/// `(C1, C2)` such that the broadcast-stage SER is at most
/// `C1 Q(sqrt(C2 p mu |w^T h|^2))`.
pub fn bc_constants(c: &Constellation) -> Result<(f64, f64)> {
    match c.modulation() {
        Modulation::Bpsk => Ok((1.0, 2.0)),
        Modulation::Mpam(m) => {
            let m = m as f64;
            Ok((2.0 * (m - 1.0) / m, 6.0 / (m * m - 1.0)))
        }
        Modulation::Qpsk => Ok((2.0, 2.0 * (PI / 4.0).sin().powi(2))),
        Modulation::Mpsk(m) => Ok((2.0, 2.0 * (PI / m as f64).sin().powi(2))),
    }
}

/// Instantaneous end-to-end bound for a relay with `Gamma = gamma` and
/// `lk` antennas.
pub fn e2e_instant_bound(gamma: f64, consts: &BoundConstants, mu: f64, p: f64, lk: usize) -> f64 {
    let ma = consts.c3 * consts.d_min * consts.d_min * gamma / 2.0;
    let bc = consts.c2 * p * gamma * bc_split(lk);
    consts.alpha * q_function((mu * ma.min(bc)).max(0.0).sqrt())
}

/// Equal-layout system: `relays` relays with `antennas` antennas each, at
/// linear SNR `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfSpec {
    pub relays: usize,
    pub antennas: usize,
    pub mu: f64,
}

impl MgfSpec {
    pub fn new(relays: usize, antennas: usize, mu: f64) -> Result<Self> {
        if relays == 0 || antennas == 0 {
            return Err(Error::Domain("need at least one relay and one antenna".into()));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::Domain(format!("SNR must be finite and nonnegative, got {mu}")));
        }
        Ok(MgfSpec { relays, antennas, mu })
    }

    pub fn with_mu(self, mu: f64) -> Self {
        MgfSpec { mu, ..self }
    }
}

/// Tail `P(X > z)` of `X ~ Gamma(l, 1)`.
fn gamma_tail(z: f64, l: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..l {
        term *= z / i as f64;
        sum += term;
    }
    (-z).exp() * sum
}

fn gamma_density(z: f64, l: usize) -> f64 {
    if z <= 0.0 {
        return if l == 1 { 1.0 } else { 0.0 };
    }
    (-z + (l - 1) as f64 * z.ln()).exp() / factorial(l - 1)
}

/// CDF of `Gamma_{k^} = max_k min(|h_k|^2, |g_k|^2)`:
/// `(1 - G(z)^2)^K`.
pub fn cdf_min(z: f64, spec: &MgfSpec) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let g = gamma_tail(z, spec.antennas);
    (1.0 - g * g).powi(spec.relays as i32)
}

fn gl64() -> &'static GaussLegendre {
    static R: OnceLock<GaussLegendre> = OnceLock::new();
    R.get_or_init(|| GaussLegendre::new(64))
}

fn gl256() -> &'static GaussLegendre {
    static R: OnceLock<GaussLegendre> = OnceLock::new();
    R.get_or_init(|| GaussLegendre::new(256))
}

fn gl512() -> &'static GaussLegendre {
    static R: OnceLock<GaussLegendre> = OnceLock::new();
    R.get_or_init(|| GaussLegendre::new(512))
}

fn composite(a: f64, b: f64, panels: usize, f: &impl Fn(f64) -> f64) -> f64 {
    let rule = gl64();
    let w = (b - a) / panels as f64;
    (0..panels).map(|i| rule.integrate(a + i as f64 * w, a + (i + 1) as f64 * w, f)).sum()
}

/// Conditional CDF of `|h_{k^}|^2` given that `g` is the weaker link of the
/// selected relay: `K int_0^z (G(u) - G(z))^2 dF_u(u)`, where
/// `F_u = (1 - G^2)^{K-1}` is the CDF of the best competing relay. For a
/// single relay `u` is identically zero.
pub fn cdf_max(z: f64, spec: &MgfSpec) -> Result<f64> {
    if z <= 0.0 {
        return Ok(0.0);
    }
    let (k, l) = (spec.relays, spec.antennas);
    let gz = gamma_tail(z, l);
    if k == 1 {
        return Ok((1.0 - gz).powi(2));
    }
    let integrand = |u: f64| {
        let gu = gamma_tail(u, l);
        // d/du (1 - G^2)^{K-1}
        let dens = (k - 1) as f64 * (1.0 - gu * gu).powi(k as i32 - 2) * 2.0 * gu * gamma_density(u, l);
        (gu - gz).powi(2) * dens
    };
    let panels = (z / 2.0).ceil().max(1.0) as usize;
    let coarse = composite(0.0, z, panels, &integrand);
    let fine = composite(0.0, z, 2 * panels, &integrand);
    if (coarse - fine).abs() > 1e-10 * fine.abs().max(1e-300) + 1e-14 {
        return Err(Error::Numerical(format!(
            "cdf_max quadrature did not settle at z={z}, K={k}, L={l}: {coarse} vs {fine}"
        )));
    }
    Ok((k as f64 * fine).clamp(0.0, 1.0))
}

/// CDF of `|h_{k^}|^2` under MaxMin selection: `(cdf_min + cdf_max) / 2`.
pub fn cdf_selected(z: f64, spec: &MgfSpec) -> Result<f64> {
    Ok(0.5 * cdf_min(z, spec) + 0.5 * cdf_max(z, spec)?)
}

/// Calls `f(j, S)` for every composition `j` of `n` into `parts` parts,
/// where `S = sum_l l j_l`, passing the multinomial weight
/// `n! / prod j_l! * prod (1/l!)^{j_l}`.
fn for_each_composition(n: usize, parts: usize, f: &mut impl FnMut(f64, usize)) {
    fn rec(
        l: usize,
        left: usize,
        parts: usize,
        weight: f64,
        s: usize,
        f: &mut impl FnMut(f64, usize),
    ) {
        if l == parts - 1 {
            let w = weight / factorial(left) * (1.0 / factorial(l)).powi(left as i32);
            f(w, s + l * left);
            return;
        }
        for j in 0..=left {
            let w = weight / factorial(j) * (1.0 / factorial(l)).powi(j as i32);
            rec(l + 1, left - j, parts, w, s + l * j, f);
        }
    }
    rec(0, n, parts, factorial(n), 0, f);
}

/// `sum_j mult(n, j) (L-1+S)!/(L-1)! (n+1+s)^{-(L+S)}`: the transform of
/// `exp(-n z) G(z)^n`-weighted terms from the case where `h` is the weaker
/// link.
fn term_f(s: f64, n: usize, l: usize) -> f64 {
    let mut acc = 0.0;
    for_each_composition(n, l, &mut |w, big_s| {
        acc += w * factorial(l - 1 + big_s) / factorial(l - 1) * (n as f64 + 1.0 + s).powi(-((l + big_s) as i32));
    });
    acc
}

/// Counterpart of [`term_f`] for the case where `g` is the weaker link and
/// `h` exceeds it.
fn term_h(s: f64, n: usize, l: usize) -> f64 {
    let mut acc = 0.0;
    for_each_composition(n, l, &mut |w, big_s| {
        for i in 0..l {
            acc += w * factorial(l - 1 + big_s + i) / (factorial(l - 1) * factorial(i))
                * (1.0 + s).powi(i as i32 - l as i32)
                * (n as f64 + 2.0 + s).powi(-((l + big_s + i) as i32));
        }
    });
    acc
}

const MAX_CLOSED_FORM: usize = 8;

/// Closed-form `psi(t) = E[exp(-t mu |h_{k^}|^2)]`.
///
/// `psi(s = t mu) = K sum_{k<K} C(K-1, k) (-1)^k [F(s, 2k+1) + H(s, 2k)]`
/// with `F`, `H` the multinomial sums of [`term_f`] and [`term_h`].
pub fn mgf_selected(t: f64, spec: &MgfSpec) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("MGF argument must be finite and nonnegative, got {t}")));
    }
    if spec.relays > MAX_CLOSED_FORM || spec.antennas > MAX_CLOSED_FORM {
        return Err(Error::Domain(format!(
            "closed-form MGF limited to K, L <= {MAX_CLOSED_FORM} (alternating sum loses precision)"
        )));
    }
    let s = t * spec.mu;
    let (k, l) = (spec.relays, spec.antennas);
    let mut acc = 0.0;
    for i in 0..k {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc += binomial(k - 1, i) * sign * (term_f(s, 2 * i + 1, l) + term_h(s, 2 * i, l));
    }
    // the alternating sum cancels to rounding noise for very large s
    Ok((k as f64 * acc).max(0.0))
}

/// `1/pi int_0^{pi/2} f(theta) d theta` with the 256-point rule, checked
/// against the 512-point rule.
fn craig_integral(mut f: impl FnMut(f64) -> Result<f64>, what: &str) -> Result<f64> {
    let mut eval = |rule: &GaussLegendre| -> Result<f64> {
        let mut err = None;
        let v = rule.integrate(0.0, PI / 2.0, |th| match f(th) {
            Ok(x) => x,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(v / PI),
        }
    };
    let a = eval(gl256())?;
    let b = eval(gl512())?;
    // values below 1e-15 are at the rounding floor of the closed-form MGF
    if (a - b).abs() > 1e-6 * b.abs() + 1e-15 {
        return Err(Error::Numerical(format!("{what}: 256/512-point rules disagree ({a} vs {b})")));
    }
    Ok(a)
}

fn require_real(c: &Constellation) -> Result<()> {
    if !c.modulation().is_real() {
        return Err(Error::Domain(format!(
            "averaged bounds need a real (PAM) alphabet with quarter-turn rotation, got {}",
            c.modulation()
        )));
    }
    Ok(())
}

/// Averaged MA-stage bound for a real alphabet at `upsilon = pi/2`:
/// `sum_D 1/(M^2 pi) int psi(|d1|^2 / 4sin^2) psi(|d2|^2 / 4sin^2)`.
///
/// The product of MGFs treats `|h|^2` and `|g|^2` of the selected relay as
/// independent.
pub fn ser_ma_avg(c: &Constellation, spec: &MgfSpec) -> Result<f64> {
    require_real(c)?;
    let d = difference_set(c);
    // distinct squared differences, and per transition the index pair
    let mut values: Vec<f64> = Vec::new();
    let mut idx = |v: f64| -> usize {
        match values.iter().position(|x| (x - v).abs() < 1e-12) {
            Some(i) => i,
            None => {
                values.push(v);
                values.len() - 1
            }
        }
    };
    let pairs: Vec<(usize, usize)> =
        d.transitions().iter().map(|t| (idx(t.d1.norm_sqr()), idx(t.d2.norm_sqr()))).collect();
    let m2 = (c.size() * c.size()) as f64;
    let mut psi = vec![0.0; values.len()];
    craig_integral(
        |th| {
            let s2 = 4.0 * th.sin().powi(2);
            for (p, v) in psi.iter_mut().zip(&values) {
                *p = mgf_selected(v / s2, spec)?;
            }
            Ok(pairs.iter().map(|&(a, b)| psi[a] * psi[b]).sum::<f64>() / m2)
        },
        "ser_ma_avg",
    )
}

/// Averaged BC-stage bound for `M`-PAM:
/// `2(M-1)/(M pi) int psi(3p / ((M^2-1) sin^2))`, with the argument halved
/// when relays have more than one antenna.
pub fn ser_bc_avg(spec: &MgfSpec, p: f64, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("alphabet size must be at least 2, got {m}")));
    }
    if !(p > 0.0) {
        return Err(Error::Domain(format!("power ratio must be positive, got {p}")));
    }
    let mf = m as f64;
    let a = 3.0 * p * bc_split(spec.antennas) / (mf * mf - 1.0);
    let v = craig_integral(|th| mgf_selected(a / th.sin().powi(2), spec), "ser_bc_avg")?;
    Ok(2.0 * (mf - 1.0) / mf * v)
}

/// End-to-end averaged bound `ser_ma_avg + ser_bc_avg` for a real alphabet.
pub fn ser_e2e_avg(c: &Constellation, spec: &MgfSpec, p: f64) -> Result<f64> {
    Ok(ser_ma_avg(c, spec)? + ser_bc_avg(spec, p, c.size())?)
}

/// Diversity order and coding gain `(G_d, G_c)` of the high-SNR
/// approximation `(G_c mu)^{-G_d}` to `E[Q(sqrt(beta mu Gamma~))]`, where
/// `Gamma~` is the best per-antenna-min sum over relays.
pub fn array_gain(beta: f64, layout: &[usize]) -> Result<(usize, f64)> {
    if layout.is_empty() || layout.contains(&0) {
        return Err(Error::Domain("layout must be nonempty with positive antenna counts".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let big_l: usize = layout.iter().sum();
    let k = layout.len() as f64;
    let sqrt_pi = PI.sqrt();
    let mut den = 1.0;
    for &lk in layout {
        let lf = lk as f64;
        // G_{c,k}^{-L_k}
        let gck_neg = 2f64.powf(lf - 1.0) * PI.powf((lf - 1.0) / 2.0) * gamma_fn(lf + 0.5)?
            / (gamma_fn(lf + 1.0)? * (sqrt_pi * beta / 2.0).powf(lf));
        den *= gamma_fn(lf + 0.5)? / gck_neg;
    }
    let inner = 2f64.powf(k - 1.0) * PI.powf((k - 1.0) / 2.0) * gamma_fn(big_l as f64 + 0.5)? / den;
    Ok((big_l, inner.powf(-1.0 / big_l as f64)))
}

/// Least-squares slope of `-log10(ser)` against `snr_db / 10`.
pub fn diversity_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InsufficientStatistics(format!("need at least 2 points, got {}", points.len())));
    }
    if let Some((snr, _)) = points.iter().find(|(_, s)| !(*s > 0.0)) {
        return Err(Error::InsufficientStatistics(format!("zero SER at {snr} dB")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(d, _)| d / 10.0).collect();
    let ys: Vec<f64> = points.iter().map(|(_, s)| -s.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("SNR points must not all coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
