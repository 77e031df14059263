//! Scheme comparison with fitted diversity slopes.

use twrelay::harness::{compare_schemes, SchemeConfig, SweepSpec};
use twrelay::modem::Modulation;
use twrelay::selection::Scheme;

fn main() -> twrelay::Result<()> {
    let cfgs: Vec<SchemeConfig> =
        Scheme::ALL.iter().map(|&s| SchemeConfig::new(s, vec![1, 1, 1], Modulation::Mpam(4))).collect();
    let mut sweep = SweepSpec::new(vec![10.0, 14.0, 18.0, 22.0, 26.0]);
    sweep.min_errors = 100;
    sweep.max_trials = 2_000_000;
    let report = compare_schemes(&cfgs, &sweep, (14.0, 26.0))?;
    print!("{report}");
    Ok(())
}
