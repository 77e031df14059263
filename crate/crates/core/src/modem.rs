//! Constellations, bit labeling, symbol-level XOR network coding and the
//! difference set that drives both detection and the error bounds.
//!
//! Symbols are addressed by their bit label: `points()[w]` is the point
//! carrying the label `w`. The symbol-level XOR of two points is then the
//! point labeled with the XOR of their labels.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Supported modulation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Mpsk(usize),
    Mpam(usize),
}

impl Modulation {
    pub fn order(&self) -> usize {
        match *self {
            Modulation::Bpsk => 2,
            Modulation::Qpsk => 4,
            Modulation::Mpsk(m) | Modulation::Mpam(m) => m,
        }
    }

    /// Real-valued alphabets (BPSK and PAM), whose difference angles are all
    /// `0` or `pi`.
    pub fn is_real(&self) -> bool {
        matches!(self, Modulation::Bpsk | Modulation::Mpam(_))
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Modulation::Bpsk => write!(f, "bpsk"),
            Modulation::Qpsk => write!(f, "qpsk"),
            Modulation::Mpsk(m) => write!(f, "{m}psk"),
            Modulation::Mpam(m) => write!(f, "{m}pam"),
        }
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "bpsk" => return Ok(Modulation::Bpsk),
            "qpsk" => return Ok(Modulation::Qpsk),
            _ => {}
        }
        let parse_order = |digits: &str| {
            digits
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("unknown modulation `{s}`")))
        };
        if let Some(d) = s.strip_suffix("psk") {
            return Ok(Modulation::Mpsk(parse_order(d)?));
        }
        if let Some(d) = s.strip_suffix("pam") {
            return Ok(Modulation::Mpam(parse_order(d)?));
        }
        Err(Error::Config(format!("unknown modulation `{s}`")))
    }
}

impl From<Modulation> for String {
    fn from(m: Modulation) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for Modulation {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn gray(m: usize) -> usize {
    m ^ (m >> 1)
}

/// A unit-average-energy alphabet with a bijective Gray bit labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    modulation: Modulation,
    points: Vec<Complex64>,
}

/// Builds the constellation for `kind`.
pub fn make_constellation(kind: Modulation) -> Result<Constellation> {
    Constellation::new(kind)
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Result<Self> {
        let m = modulation.order();
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::Config(format!(
                "constellation order must be a power of two >= 2, got {m}"
            )));
        }
        let mut points = vec![Complex64::new(0.0, 0.0); m];
        match modulation {
            Modulation::Bpsk => {
                points[0] = Complex64::new(1.0, 0.0);
                points[1] = Complex64::new(-1.0, 0.0);
            }
            Modulation::Qpsk => {
                for k in 0..4 {
                    points[gray(k)] = Complex64::from_polar(1.0, PI / 4.0 + k as f64 * PI / 2.0);
                }
            }
            Modulation::Mpsk(_) => {
                for k in 0..m {
                    points[gray(k)] = Complex64::from_polar(1.0, TAU * k as f64 / m as f64);
                }
            }
            Modulation::Mpam(_) => {
                let scale = (3.0 / ((m * m - 1) as f64)).sqrt();
                for k in 0..m {
                    let level = (2 * k) as f64 - (m - 1) as f64;
                    points[gray(k)] = Complex64::new(level * scale, 0.0);
                }
            }
        }
        Ok(Self { modulation, points })
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    /// Points indexed by bit label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.points.len().trailing_zeros()
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.size() as f64
    }

    /// Bit label of an alphabet point.
    pub fn label_of(&self, symbol: Complex64) -> Result<usize> {
        self.points
            .iter()
            .position(|p| (p - symbol).norm() < 1e-9)
            .ok_or_else(|| Error::Domain(format!("symbol {symbol} is not in the {} alphabet", self.modulation)))
    }

    /// Label of the network-coded symbol.
    #[inline]
    pub fn xor_labels(a: usize, b: usize) -> usize {
        a ^ b
    }

    /// Symbol-level XOR: the point whose label is the XOR of the two labels.
    pub fn xor_combine(&self, s1: Complex64, s2: Complex64) -> Result<Complex64> {
        let a = self.label_of(s1)?;
        let b = self.label_of(s2)?;
        Ok(self.points[Self::xor_labels(a, b)])
    }

    /// Scalar ML detection: label minimising `|y - gain * s|^2`, lowest label
    /// on ties.
    pub fn detect(&self, y: Complex64, gain: Complex64) -> usize {
        let mut best = 0;
        let mut best_metric = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let metric = (y - gain * p).norm_sqr();
            if metric < best_metric {
                best_metric = metric;
                best = label;
            }
        }
        best
    }

    /// Minimum distance between two distinct points.
    pub fn min_distance(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.min((a - b).norm());
            }
        }
        d
    }
}

/// One NCS-changing MA-stage error event `(s1, s2) -> (s1', s2')`, with
/// `d1 = s1 - s1'` and `d2 = s2 - s2'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub sent: (usize, usize),
    pub decided: (usize, usize),
    pub d1: Complex64,
    pub d2: Complex64,
}

/// Multiset of difference pairs over every ordered quadruple whose
/// network-coded symbols differ.
#[derive(Debug, Clone)]
pub struct DifferenceSet {
    transitions: Vec<Transition>,
    d_min: f64,
    angle_gaps: Vec<f64>,
}

const ZERO_DIFF: f64 = 1e-12;

impl DifferenceSet {
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Multiset size `|D|`.
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    /// Distinct values of `angle(d1) - angle(d2)` (wrapped to `[0, 2pi)`)
    /// over transitions where both differences are nonzero.
    pub fn angle_gaps(&self) -> &[f64] {
        &self.angle_gaps
    }

    pub fn has_joint_errors(&self) -> bool {
        !self.angle_gaps.is_empty()
    }
}

/// Enumerates all `M^4` ordered quadruples of the alphabet.
pub fn difference_set(c: &Constellation) -> DifferenceSet {
    let m = c.size();
    let mut transitions = Vec::new();
    let mut d_min = f64::INFINITY;
    let mut gaps: Vec<f64> = Vec::new();
    for a1 in 0..m {
        for a2 in 0..m {
            for b1 in 0..m {
                for b2 in 0..m {
                    if a1 ^ a2 == b1 ^ b2 {
                        continue;
                    }
                    let d1 = c.point(a1) - c.point(b1);
                    let d2 = c.point(a2) - c.point(b2);
                    for d in [d1, d2] {
                        let n = d.norm();
                        if n > ZERO_DIFF {
                            d_min = d_min.min(n);
                        }
                    }
                    if d1.norm() > ZERO_DIFF && d2.norm() > ZERO_DIFF {
                        let gap = crate::math::wrap_angle(d1.arg() - d2.arg());
                        if !gaps.iter().any(|g| angle_distance(*g, gap) < 1e-9) {
                            gaps.push(gap);
                        }
                    }
                    transitions.push(Transition { sent: (a1, a2), decided: (b1, b2), d1, d2 });
                }
            }
        }
    }
    gaps.sort_by(f64::total_cmp);
    DifferenceSet { transitions, d_min, angle_gaps: gaps }
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// `min 2(1 - |cos(angle(d1) - angle(d2) + upsilon)|)` over transitions with
/// both differences nonzero; `+inf` when there are none.
pub fn rho_min(upsilon: f64, d: &DifferenceSet) -> f64 {
    d.angle_gaps
        .iter()
        .map(|gap| 2.0 * (1.0 - (gap + upsilon).cos().abs()))
        .fold(f64::INFINITY, f64::min)
}

/// `min(1, rho_min(upsilon))`.
pub fn c3(upsilon: f64, d: &DifferenceSet) -> f64 {
    rho_min(upsilon, d).min(1.0)
}

const UPSILON_GRID: usize = 4096;

/// Rotation angle maximising `rho_min`: a 4096-point grid over `[0, 2pi)`
/// followed by golden-section refinement around the best grid point.
/// Alphabets without joint (both-nonzero) transitions return `0`.
pub fn optimize_upsilon(c: &Constellation) -> f64 {
    let d = difference_set(c);
    optimize_upsilon_for(&d)
}

pub fn optimize_upsilon_for(d: &DifferenceSet) -> f64 {
    if !d.has_joint_errors() {
        return 0.0;
    }
    let step = TAU / UPSILON_GRID as f64;
    let mut best = 0.0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..UPSILON_GRID {
        let u = i as f64 * step;
        let v = rho_min(u, d);
        if v > best_val {
            best_val = v;
            best = u;
        }
    }

    let f = |u: f64| rho_min(u, d);
    let (mut a, mut b) = (best - step, best + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..100 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let refined = crate::math::wrap_angle(0.5 * (a + b));
    if f(refined) > best_val {
        refined
    } else {
        best
    }
}
