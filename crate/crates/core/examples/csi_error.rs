//! SER under imperfect CSI for QPSK over two single-antenna relays.

use twrelay::harness::{run_sweep, SchemeConfig, SweepSpec};
use twrelay::modem::Modulation;
use twrelay::selection::Scheme;
use twrelay::twr::CsiScope;

fn main() -> twrelay::Result<()> {
    let mut sweep = SweepSpec::new(vec![10.0, 15.0, 20.0, 25.0]);
    sweep.min_errors = 200;
    sweep.max_trials = 2_000_000;
    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "delta2", "10 dB", "15 dB", "20 dB", "25 dB");
    for (delta2, scope) in [(0.0, CsiScope::Selection), (0.01, CsiScope::Selection), (0.1, CsiScope::Selection), (0.5, CsiScope::Selection), (0.1, CsiScope::All)] {
        let mut cfg = SchemeConfig::new(Scheme::PrMaxMinRs, vec![1, 1], Modulation::Qpsk);
        cfg.delta2 = delta2;
        cfg.csi_scope = scope;
        let rec = run_sweep(&cfg, &sweep)?;
        let tag = if scope == CsiScope::All { format!("{delta2}*") } else { delta2.to_string() };
        print!("{tag:>8}");
        for r in rec {
            print!(" {:>10.3e}", r.ser);
        }
        println!();
    }
    println!("(* estimates also used by the detectors)");
    Ok(())
}
