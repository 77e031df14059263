//! Monte-Carlo SER sweep written as CSV plus a JSON sidecar.
//!
//! `cargo run --release --example ser_sweep [config] [out-dir]`

use twrelay::harness::{run_sweep, write_outputs, RunConfig};

fn main() -> twrelay::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg_path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/qpsk_two_relays.cfg").into());
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("twrelay-sweep").display().to_string());

    let rc = RunConfig::load(&cfg_path)?;
    let records = run_sweep(&rc.scheme, &rc.sweep)?;
    for r in &records {
        println!(
            "{:>6.1} dB  SER {:.3e}  [{:.2e}, {:.2e}]  errors {:>5}  trials {:>9}",
            r.snr_db, r.ser, r.ci95_low, r.ci95_high, r.errors_e2e, r.trials
        );
    }
    let (csv, json) = write_outputs(&out, "sweep", &rc.scheme, &rc.sweep, &records)?;
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}
