//! Relay and antenna selection criteria.
//!
//! Indices are zero-based: relay `k` is `0..K`, antenna `l` is `0..L_k`.
//! Selection runs centrally on whatever channel view the [`ChannelSet`]
//! exposes (noisy estimates when present).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::phy::{relay_metrics, ChannelSet, RelayMetrics};
use crate::{Error, Result};

/// Transmission scheme under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Scheme {
    /// MaxMin relay selection with phase-rotation preprocessing and
    /// phase-rotation beamforming.
    PrMaxMinRs,
    /// Same selection and beamformer, sources transmit unrotated.
    MaxMinRsNoPr,
    /// Single best antenna over all relays, scalar channels in both stages.
    MaxMinAs,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::PrMaxMinRs, Scheme::MaxMinRsNoPr, Scheme::MaxMinAs];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::PrMaxMinRs => "pr-maxmin-rs",
            Scheme::MaxMinRsNoPr => "maxmin-rs-noPR",
            Scheme::MaxMinAs => "maxmin-as",
        }
    }

    /// Whether the sources apply the `u1` rotation.
    pub fn rotates_sources(&self) -> bool {
        !matches!(self, Scheme::MaxMinRsNoPr)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::Config(format!("unknown scheme `{t}`")))
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> String {
        s.as_str().to_string()
    }
}

impl TryFrom<String> for Scheme {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Which channel copy a decision was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiView {
    Exact,
    Estimated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionDecision {
    pub scheme: Scheme,
    pub relay: usize,
    /// Selected antenna, antenna selection only.
    pub antenna: Option<usize>,
    /// The criterion value at the selected index.
    pub metric: f64,
    pub csi: CsiView,
}

fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// `argmax_k min(|h_k|^2, |g_k|^2)`, lowest index on ties.
pub fn maxmin_rs(metrics: &[RelayMetrics]) -> SelectionDecision {
    assert!(!metrics.is_empty(), "maxmin_rs needs at least one relay");
    let (relay, metric) = argmax(metrics.iter().map(|m| m.gamma));
    SelectionDecision { scheme: Scheme::PrMaxMinRs, relay, antenna: None, metric, csi: CsiView::Exact }
}

/// `argmax_{k,l} min(|h_kl|^2, |g_kl|^2)` over every relay antenna.
pub fn maxmin_as(ch: &ChannelSet) -> SelectionDecision {
    let mut best = (0, 0, f64::NEG_INFINITY);
    for k in 0..ch.relays() {
        let (h, g) = (ch.h_view(k), ch.g_view(k));
        for (l, (a, b)) in h.iter().zip(g.iter()).enumerate() {
            let v = a.norm_sqr().min(b.norm_sqr());
            if v > best.2 {
                best = (k, l, v);
            }
        }
    }
    SelectionDecision {
        scheme: Scheme::MaxMinAs,
        relay: best.0,
        antenna: Some(best.1),
        metric: best.2,
        csi: view_of(ch),
    }
}

fn view_of(ch: &ChannelSet) -> CsiView {
    if ch.has_estimate() {
        CsiView::Estimated
    } else {
        CsiView::Exact
    }
}

/// Scheme dispatch.
pub fn select(scheme: Scheme, ch: &ChannelSet) -> SelectionDecision {
    match scheme {
        Scheme::PrMaxMinRs | Scheme::MaxMinRsNoPr => {
            let d = maxmin_rs(&relay_metrics(ch));
            SelectionDecision { scheme, csi: view_of(ch), ..d }
        }
        Scheme::MaxMinAs => maxmin_as(ch),
    }
}
