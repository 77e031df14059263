//! Monte-Carlo experiment engine: configuration files, SNR sweeps, scheme
//! comparison and CSV/JSON output.
//!
//! Trials at one SNR point are cut into fixed-size chunks. Chunk `c` of
//! point `i` always draws from stream `(i << 32) | c` of the sweep seed, so
//! every scheme sees the same channels and noise (common random numbers)
//! and the counts never depend on how many workers ran the chunks.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{array_gain, diversity_slope, ser_bc_avg, ser_ma_avg, BoundConstants, MgfSpec};
use crate::math::RngStream;
use crate::modem::{difference_set, Constellation, Modulation};
use crate::selection::Scheme;
use crate::twr::{run_trial, CsiScope, Link, TrialOutcome};
use crate::{Error, Result};

/// Trials per chunk.
pub const CHUNK_TRIALS: u64 = 4096;

/// Source rotation angle: a fixed value or the alphabet's optimum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Upsilon {
    #[default]
    Auto,
    Value(f64),
}

impl fmt::Display for Upsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Upsilon::Auto => f.write_str("auto"),
            Upsilon::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub layout: Vec<usize>,
    pub modulation: Modulation,
    pub p: f64,
    pub upsilon: Upsilon,
    pub delta2: f64,
    pub sigma2: f64,
    pub csi_scope: CsiScope,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, layout: Vec<usize>, modulation: Modulation) -> Self {
        SchemeConfig {
            scheme,
            layout,
            modulation,
            p: 1.0,
            upsilon: Upsilon::Auto,
            delta2: 0.0,
            sigma2: 1.0,
            csi_scope: CsiScope::Selection,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layout.is_empty() || self.layout.contains(&0) {
            return Err(Error::Config("layout must list at least one relay, each with >= 1 antenna".into()));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("p must be positive, got {}", self.p)));
        }
        if !(self.delta2 >= 0.0 && self.delta2.is_finite()) {
            return Err(Error::Config(format!("delta2 must be nonnegative, got {}", self.delta2)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::Config(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        if let Upsilon::Value(v) = self.upsilon {
            if !v.is_finite() {
                return Err(Error::Config("upsilon must be finite".into()));
            }
        }
        Ok(())
    }

    /// Validates and resolves `upsilon = auto`.
    pub fn resolve(&self) -> Result<Link> {
        self.validate()?;
        let constellation = Constellation::new(self.modulation).map_err(|e| Error::Config(e.to_string()))?;
        let upsilon = match self.upsilon {
            Upsilon::Auto => crate::modem::optimize_upsilon(&constellation),
            Upsilon::Value(v) => v,
        };
        Ok(Link {
            scheme: self.scheme,
            layout: self.layout.clone(),
            constellation,
            p: self.p,
            upsilon,
            delta2: self.delta2,
            sigma2: self.sigma2,
            csi_scope: self.csi_scope,
        })
    }

    /// Short label distinguishing configs in a comparison.
    pub fn label(&self) -> String {
        let mut s = self.scheme.to_string();
        if self.delta2 > 0.0 {
            s.push_str(&format!("[delta2={}]", self.delta2));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub snr_grid: Vec<f64>,
    pub min_errors: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            snr_grid: Vec::new(),
            min_errors: 100,
            max_trials: 10_000_000,
            seed: 1,
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        }
    }
}

impl SweepSpec {
    pub fn new(snr_grid: Vec<f64>) -> Self {
        SweepSpec { snr_grid, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_grid.is_empty() || self.snr_grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("snr_grid must be a nonempty list of finite dB values".into()));
        }
        if self.min_errors < 1 {
            return Err(Error::Config("min_errors must be >= 1".into()));
        }
        if self.max_trials < self.min_errors {
            return Err(Error::Config("max_trials must be >= min_errors".into()));
        }
        if self.workers < 1 {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        Ok(())
    }
}

/// One parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: SchemeConfig,
    pub sweep: SweepSpec,
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| Error::Config(format!("{key}: cannot parse `{t}`"))))
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
}

/// `a:step:b` (inclusive) or a comma-separated list.
fn parse_grid(v: &str) -> Result<Vec<f64>> {
    if v.contains(':') {
        let parts: Vec<f64> = v.split(':').map(|t| parse_num("snr_grid", t.trim())).collect::<Result<_>>()?;
        let [a, step, b] = parts[..] else {
            return Err(Error::Config(format!("snr_grid range must be start:step:stop, got `{v}`")));
        };
        if !(step > 0.0) || b < a {
            return Err(Error::Config(format!("snr_grid range `{v}` is empty")));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + step * i as f64).collect());
    }
    parse_list("snr_grid", v)
}

impl RunConfig {
    /// Parses flat `key = value` text; `#` starts a comment. Keys use the
    /// field names of [`SchemeConfig`] and [`SweepSpec`] (`-` and `_` are
    /// interchangeable).
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected `key = value`", n + 1)));
            };
            let key = k.trim().replace('-', "_").to_ascii_lowercase();
            if kv.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        let take = |kv: &mut BTreeMap<String, String>, k: &str| kv.remove(k);
        let need = |kv: &mut BTreeMap<String, String>, k: &str| {
            kv.remove(k).ok_or_else(|| Error::Config(format!("missing required key `{k}`")))
        };

        let scheme: Scheme = need(&mut kv, "scheme")?.parse()?;
        let layout = parse_list("layout", &need(&mut kv, "layout")?)?;
        let modulation: Modulation =
            need(&mut kv, "modulation")?.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        let mut cfg = SchemeConfig::new(scheme, layout, modulation);
        if let Some(v) = take(&mut kv, "p") {
            cfg.p = parse_num("p", &v)?;
        }
        if let Some(v) = take(&mut kv, "upsilon") {
            cfg.upsilon = parse_upsilon(&v)?;
        }
        if let Some(v) = take(&mut kv, "delta2") {
            cfg.delta2 = parse_num("delta2", &v)?;
        }
        if let Some(v) = take(&mut kv, "sigma2") {
            cfg.sigma2 = parse_num("sigma2", &v)?;
        }
        if let Some(v) = take(&mut kv, "csi_scope") {
            cfg.csi_scope = match v.to_ascii_lowercase().as_str() {
                "selection" => CsiScope::Selection,
                "all" => CsiScope::All,
                other => return Err(Error::Config(format!("csi_scope must be `selection` or `all`, got `{other}`"))),
            };
        }

        let mut sweep = SweepSpec::new(parse_grid(&need(&mut kv, "snr_grid")?)?);
        if let Some(v) = take(&mut kv, "min_errors") {
            sweep.min_errors = parse_num("min_errors", &v)?;
        }
        if let Some(v) = take(&mut kv, "max_trials") {
            sweep.max_trials = parse_num::<f64>("max_trials", &v).and_then(|x| {
                if x >= 1.0 && x.fract() == 0.0 && x <= u64::MAX as f64 {
                    Ok(x as u64)
                } else {
                    Err(Error::Config(format!("max_trials: `{v}` is not a positive integer")))
                }
            })?;
        }
        if let Some(v) = take(&mut kv, "seed") {
            sweep.seed = parse_num("seed", &v)?;
        }
        if let Some(v) = take(&mut kv, "workers") {
            sweep.workers = parse_num("workers", &v)?;
        }
        if let Some(k) = kv.keys().next() {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        cfg.validate()?;
        sweep.validate()?;
        Ok(RunConfig { scheme: cfg, sweep })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

fn parse_upsilon(v: &str) -> Result<Upsilon> {
    let t = v.trim().to_ascii_lowercase();
    match t.as_str() {
        "auto" => Ok(Upsilon::Auto),
        "pi/2" => Ok(Upsilon::Value(FRAC_PI_2)),
        "pi/8" => Ok(Upsilon::Value(PI / 8.0)),
        _ => Ok(Upsilon::Value(parse_num("upsilon", &t)?)),
    }
}

/// One row of sweep output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerRecord {
    pub snr_db: f64,
    pub scheme: String,
    pub errors_e2e: u64,
    pub errors_ma: u64,
    pub errors_bc: u64,
    pub trials: u64,
    pub ser: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub analytic_bound: Option<f64>,
}

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `x` successes in `n` trials.
pub fn wilson_interval(x: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = x as f64 / n;
    let z2 = Z95 * Z95;
    let den = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / den;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / den;
    let lo = if x == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if x as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    trials: u64,
    e2e: u64,
    ma: u64,
    bc: u64,
}

impl Counts {
    fn add(&mut self, o: &TrialOutcome) {
        self.trials += 1;
        self.e2e += o.e2e_count();
        self.ma += o.relay_error as u64;
        self.bc += o.bc_count();
    }

    fn merge(&mut self, o: &Counts) {
        self.trials += o.trials;
        self.e2e += o.e2e;
        self.ma += o.ma;
        self.bc += o.bc;
    }
}

fn run_chunk(link: &Link, mu: f64, seed: u64, point: usize, chunk: u64, trials: u64) -> Result<Counts> {
    let mut rng = RngStream::new(seed, ((point as u64) << 32) | chunk);
    let mut c = Counts::default();
    for _ in 0..trials {
        c.add(&run_trial(link, mu, &mut rng)?);
    }
    Ok(c)
}

fn run_point(link: &Link, sweep: &SweepSpec, point: usize, mu: f64) -> Result<Counts> {
    let n_chunks = sweep.max_trials.div_ceil(CHUNK_TRIALS);
    let round = (2 * sweep.workers) as u64;
    let mut total = Counts::default();
    let mut next = 0u64;
    while next < n_chunks {
        let ids: Vec<u64> = (next..(next + round).min(n_chunks)).collect();
        let results: Vec<Result<Counts>> = ids
            .par_iter()
            .map(|&c| {
                let len = CHUNK_TRIALS.min(sweep.max_trials - c * CHUNK_TRIALS);
                run_chunk(link, mu, sweep.seed, point, c, len)
            })
            .collect();
        // in-order reduction, stopping at the first chunk that reaches the
        // error target so the result does not depend on the round size
        for r in results {
            total.merge(&r?);
            if total.e2e >= sweep.min_errors {
                return Ok(total);
            }
        }
        next += ids.len() as u64;
    }
    Ok(total)
}

/// Whether the averaged closed-form bound applies: PR-MaxMin-RS over equal
/// layouts, a real alphabet at a quarter-turn rotation (or one without
/// joint errors) and perfect CSI.
pub fn analytic_support(link: &Link) -> Option<MgfSpec> {
    let l0 = link.layout[0];
    if link.scheme != Scheme::PrMaxMinRs
        || link.delta2 > 0.0
        || !link.layout.iter().all(|&l| l == l0)
        || !link.constellation.modulation().is_real()
        || link.layout.len() > 8
        || l0 > 8
    {
        return None;
    }
    let d = difference_set(&link.constellation);
    let quarter = (link.upsilon.rem_euclid(PI) - FRAC_PI_2).abs() < 1e-9;
    if d.has_joint_errors() && !quarter {
        return None;
    }
    MgfSpec::new(link.layout.len(), l0, 0.0).ok()
}

/// `ser_ma_avg + ser_bc_avg` at `snr_db`, when supported.
pub fn analytic_bound(link: &Link, snr_db: f64) -> Result<Option<f64>> {
    let Some(spec) = analytic_support(link) else {
        return Ok(None);
    };
    let spec = spec.with_mu(db_to_linear(snr_db));
    let ma = ser_ma_avg(&link.constellation, &spec)?;
    let bc = ser_bc_avg(&spec, link.p, link.constellation.size())?;
    Ok(Some(ma + bc))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Runs every SNR point of `sweep` until `min_errors` end-to-end errors or
/// `max_trials` trials.
pub fn run_sweep(cfg: &SchemeConfig, sweep: &SweepSpec) -> Result<Vec<SerRecord>> {
    sweep.validate()?;
    let link = cfg.resolve()?;
    let pool = pool(sweep.workers)?;
    let mut out = Vec::with_capacity(sweep.snr_grid.len());
    for (i, &snr_db) in sweep.snr_grid.iter().enumerate() {
        let mu = db_to_linear(snr_db);
        let c = pool.install(|| run_point(&link, sweep, i, mu))?;
        let decisions = 2 * c.trials;
        let (lo, hi) = wilson_interval(c.e2e, decisions);
        out.push(SerRecord {
            snr_db,
            scheme: cfg.scheme.to_string(),
            errors_e2e: c.e2e,
            errors_ma: c.ma,
            errors_bc: c.bc,
            trials: c.trials,
            ser: c.e2e as f64 / decisions as f64,
            ci95_low: lo,
            ci95_high: hi,
            analytic_bound: analytic_bound(&link, snr_db)?,
        });
    }
    Ok(out)
}

/// Slope of one scheme over the fit window.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSummary {
    pub label: String,
    pub records: Vec<SerRecord>,
    /// `None` when the window holds fewer than two nonzero points.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub window: (f64, f64),
    pub schemes: Vec<SchemeSummary>,
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>8}", "snr_db")?;
        for s in &self.schemes {
            write!(f, "  {:>28}", s.label)?;
        }
        writeln!(f)?;
        let n = self.schemes.first().map_or(0, |s| s.records.len());
        for i in 0..n {
            write!(f, "{:>8.2}", self.schemes[0].records[i].snr_db)?;
            for s in &self.schemes {
                let r = &s.records[i];
                write!(f, "  {:>16.4e} ({:>9})", r.ser, r.errors_e2e)?;
            }
            writeln!(f)?;
        }
        writeln!(f, "slopes over {}..{} dB:", self.window.0, self.window.1)?;
        for s in &self.schemes {
            match s.slope {
                Some(v) => writeln!(f, "  {:<28} {v:.3}", s.label)?,
                None => writeln!(f, "  {:<28} n/a", s.label)?,
            }
        }
        Ok(())
    }
}

/// Least-squares slope over records whose SNR lies in `window` and whose
/// SER is nonzero.
pub fn fit_slope(records: &[SerRecord], window: (f64, f64)) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.snr_db >= window.0 && r.snr_db <= window.1 && r.errors_e2e > 0)
        .map(|r| (r.snr_db, r.ser))
        .collect();
    diversity_slope(&pts).ok()
}

/// Runs every config over the same sweep and fits slopes over `window`.
pub fn compare_schemes(cfgs: &[SchemeConfig], sweep: &SweepSpec, window: (f64, f64)) -> Result<ComparisonReport> {
    let Some(first) = cfgs.first() else {
        return Err(Error::Config("nothing to compare".into()));
    };
    for c in cfgs {
        if c.modulation != first.modulation || c.layout != first.layout {
            return Err(Error::Config(format!(
                "compared configs must share modulation and layout: {} {:?} vs {} {:?}",
                first.modulation, first.layout, c.modulation, c.layout
            )));
        }
    }
    let mut schemes = Vec::new();
    for c in cfgs {
        let records = run_sweep(c, sweep)?;
        let slope = fit_slope(&records, window);
        schemes.push(SchemeSummary { label: c.label(), records, slope });
    }
    Ok(ComparisonReport { window, schemes })
}

pub fn write_csv(path: impl AsRef<Path>, records: &[SerRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON description of the resolved configuration and sweep.
pub fn sidecar(cfg: &SchemeConfig, link: &Link, sweep: &SweepSpec) -> serde_json::Value {
    serde_json::json!({
        "crate_version": env!("CARGO_PKG_VERSION"),
        "config": {
            "scheme": cfg.scheme.to_string(),
            "layout": cfg.layout,
            "modulation": cfg.modulation.to_string(),
            "p": cfg.p,
            "upsilon": cfg.upsilon.to_string(),
            "upsilon_resolved": link.upsilon,
            "delta2": cfg.delta2,
            "sigma2": cfg.sigma2,
            "csi_scope": cfg.csi_scope,
        },
        "sweep": sweep,
        "chunk_trials": CHUNK_TRIALS,
        "columns": ["snr_db", "scheme", "errors_e2e", "errors_ma", "errors_bc", "trials", "ser",
                    "ci95_low", "ci95_high", "analytic_bound"],
    })
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`; returns both paths.
pub fn write_outputs(
    dir: impl AsRef<Path>,
    stem: &str,
    cfg: &SchemeConfig,
    sweep: &SweepSpec,
    records: &[SerRecord],
) -> Result<(PathBuf, PathBuf)> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_csv(&csv_path, records)?;
    let link = cfg.resolve()?;
    let mut text = serde_json::to_string_pretty(&sidecar(cfg, &link, sweep))?;
    text.push('\n');
    fs::write(&json_path, text)?;
    Ok((csv_path, json_path))
}

/// One row of closed-form output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticRow {
    pub snr_db: f64,
    pub ser_ma_avg: Option<f64>,
    pub ser_bc_avg: Option<f64>,
    pub ser_bound: Option<f64>,
    /// `alpha (G_c mu)^{-G_d}`.
    pub asymptote: f64,
}

/// Closed-form curves for `cfg` over `snr_grid`, plus the bound constants.
pub fn analyze(cfg: &SchemeConfig, snr_grid: &[f64]) -> Result<(BoundConstants, (usize, f64), Vec<AnalyticRow>)> {
    let link = cfg.resolve()?;
    let lk = *link.layout.iter().min().expect("validated layout");
    let consts = BoundConstants::new(&link.constellation, link.upsilon, link.p, lk)?;
    let (gd, gc) = array_gain(consts.beta, &link.layout)?;
    let spec = analytic_support(&link);
    let mut rows = Vec::new();
    for &snr_db in snr_grid {
        let mu = db_to_linear(snr_db);
        let (ma, bc) = match spec {
            Some(s) => {
                let s = s.with_mu(mu);
                (Some(ser_ma_avg(&link.constellation, &s)?), Some(ser_bc_avg(&s, link.p, link.constellation.size())?))
            }
            None => (None, None),
        };
        rows.push(AnalyticRow {
            snr_db,
            ser_ma_avg: ma,
            ser_bc_avg: bc,
            ser_bound: ma.zip(bc).map(|(a, b)| a + b),
            asymptote: consts.alpha * (gc * mu).powi(-(gd as i32)),
        });
    }
    Ok((consts, (gd, gc), rows))
}

/// Outcome of one self-check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Fast invariant suite over random draws.
pub fn selfcheck(draws: usize) -> Vec<CheckResult> {
    use crate::analysis::{cdf_selected, mgf_selected};
    use crate::modem::{c3, optimize_upsilon, rho_min};
    use crate::phy::{effective_angle, relay_metrics, sample_channels};
    use crate::selection::{maxmin_as, maxmin_rs};
    use crate::twr::{dd_ma, pr_beamform, pr_preprocess};

    let mut out = Vec::new();
    let mut rng = RngStream::new(0x5e1f, 0);

    let mut worst: f64 = 0.0;
    for l in [2, 4, 8] {
        for _ in 0..draws {
            let ch = sample_channels(&[l], &mut rng).expect("valid layout");
            let (h, g) = (ch.h(0), ch.g(0));
            let bf = pr_beamform(h, g, effective_angle(h, g));
            if let Ok(bf) = bf {
                let (a, b) = bf.branch_gains(h, g);
                let gamma = h.norm_sqr().min(g.norm_sqr());
                worst = worst.max((a.min(b) - gamma / 2.0).abs() / gamma);
            }
        }
    }
    out.push(CheckResult {
        name: "beamformer delivers half the weaker channel",
        passed: worst < 1e-9,
        detail: format!("max relative error {worst:.2e}"),
    });

    let mut violations = 0usize;
    for m in [Modulation::Mpam(4), Modulation::Qpsk] {
        let c = Constellation::new(m).expect("supported");
        let d = difference_set(&c);
        let ups = optimize_upsilon(&c);
        let c3v = c3(ups, &d);
        for _ in 0..draws {
            let ch = sample_channels(&[2], &mut rng).expect("valid layout");
            let (h, g) = (ch.h(0), ch.g(0));
            let gamma = h.norm_sqr().min(g.norm_sqr());
            let (u1, u2) = pr_preprocess(effective_angle(h, g), ups);
            let lb = c3v * gamma * d.d_min().powi(2);
            violations += d
                .transitions()
                .iter()
                .filter(|t| dd_ma(h, g, u1, u2, t.d1, t.d2).powi(2) < lb - 1e-12 * (1.0 + lb))
                .count();
        }
    }
    out.push(CheckResult {
        name: "rotated decision distance lower bound",
        passed: violations == 0,
        detail: format!("{violations} violations"),
    });

    let mut violations = 0usize;
    for layout in [vec![1, 1, 1, 1], vec![2, 2], vec![4, 4]] {
        for _ in 0..draws {
            let ch = sample_channels(&layout, &mut rng).expect("valid layout");
            let ms = relay_metrics(&ch);
            let top = ms[maxmin_rs(&ms).relay].gamma;
            let a = maxmin_as(&ch);
            let mid = ms[a.relay].antenna_min_sum();
            if top < mid - 1e-12 || mid < a.metric - 1e-12 {
                violations += 1;
            }
        }
    }
    out.push(CheckResult {
        name: "selection sandwich",
        passed: violations == 0,
        detail: format!("{violations} violations"),
    });

    let mut worst: f64 = 0.0;
    for k in 1..=3 {
        for l in 1..=3 {
            let spec = MgfSpec::new(k, l, 1.0).expect("valid spec");
            worst = worst.max(mgf_selected(0.0, &spec).map_or(f64::INFINITY, |v| (v - 1.0).abs()));
        }
    }
    out.push(CheckResult {
        name: "MGF normalisation",
        passed: worst < 1e-8,
        detail: format!("max |psi(0) - 1| = {worst:.2e}"),
    });

    let mut ok = true;
    for (k, l) in [(2, 1), (2, 2), (3, 1)] {
        let spec = MgfSpec::new(k, l, 1.0).expect("valid spec");
        let mut last = 0.0;
        for i in 0..=100 {
            match cdf_selected(0.2 * i as f64, &spec) {
                Ok(v) if v >= last - 1e-14 && v <= 1.0 => last = v,
                _ => ok = false,
            }
        }
    }
    out.push(CheckResult { name: "selected-channel CDF monotone", passed: ok, detail: String::new() });

    let c = Constellation::new(Modulation::Mpam(4)).expect("supported");
    let ups = optimize_upsilon(&c);
    let rho = rho_min(ups, &difference_set(&c));
    out.push(CheckResult {
        name: "4-PAM rotation optimum",
        passed: (rho - 2.0).abs() < 1e-6,
        detail: format!("upsilon = {ups:.9}, rho = {rho:.9}"),
    });

    let cfg = SchemeConfig::new(Scheme::PrMaxMinRs, vec![1, 2], Modulation::Qpsk);
    let mut sweep = SweepSpec::new(vec![0.0, 5.0]);
    sweep.min_errors = 50;
    sweep.max_trials = 20_000;
    let a = {
        sweep.workers = 1;
        run_sweep(&cfg, &sweep)
    };
    let b = {
        sweep.workers = 3;
        run_sweep(&cfg, &sweep)
    };
    let same = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
    out.push(CheckResult {
        name: "sweep independent of worker count",
        passed: same,
        detail: String::new(),
    });
    out
}
