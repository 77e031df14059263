use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twrelay::harness::{analyze, compare_schemes, run_sweep, selfcheck, write_outputs, RunConfig};

#[derive(Parser)]
#[command(name = "twrelay", version, about = "Two-way relay selection simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Monte-Carlo SER sweep; writes <scheme>.csv and <scheme>.json into --out.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Runs several configs over the first config's sweep and fits slopes.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        configs: Vec<PathBuf>,
        /// Slope-fit window in dB, defaults to the top half of the grid.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Option<Vec<f64>>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Closed-form curves only.
    Analyze {
        #[arg(long)]
        config: PathBuf,
    },
    /// Runs the invariant suite.
    Selfcheck {
        #[arg(long, default_value_t = 2000)]
        draws: usize,
    },
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.6e}"))
}

fn run(cli: Cli) -> twrelay::Result<bool> {
    match cli.cmd {
        Cmd::Simulate { config, out, seed, workers } => {
            let mut rc = RunConfig::load(&config)?;
            if let Some(s) = seed {
                rc.sweep.seed = s;
            }
            if let Some(w) = workers {
                rc.sweep.workers = w;
            }
            let records = run_sweep(&rc.scheme, &rc.sweep)?;
            let stem = rc.scheme.scheme.to_string();
            let (csv, json) = write_outputs(&out, &stem, &rc.scheme, &rc.sweep, &records)?;
            println!("{:>8} {:>12} {:>10} {:>12} {:>12}", "snr_db", "ser", "errors", "trials", "bound");
            for r in &records {
                println!(
                    "{:>8.2} {:>12.4e} {:>10} {:>12} {:>12}",
                    r.snr_db,
                    r.ser,
                    r.errors_e2e,
                    r.trials,
                    opt(r.analytic_bound)
                );
            }
            println!("wrote {} and {}", csv.display(), json.display());
            Ok(true)
        }
        Cmd::Compare { configs, window, workers } => {
            let loaded = configs.iter().map(RunConfig::load).collect::<twrelay::Result<Vec<_>>>()?;
            let mut sweep = loaded[0].sweep.clone();
            if let Some(w) = workers {
                sweep.workers = w;
            }
            let grid = &sweep.snr_grid;
            let window = match window {
                Some(w) => (w[0], w[1]),
                None => (grid[grid.len() / 2], grid[grid.len() - 1]),
            };
            let cfgs: Vec<_> = loaded.into_iter().map(|rc| rc.scheme).collect();
            print!("{}", compare_schemes(&cfgs, &sweep, window)?);
            Ok(true)
        }
        Cmd::Analyze { config } => {
            let rc = RunConfig::load(&config)?;
            let (k, (gd, gc), rows) = analyze(&rc.scheme, &rc.sweep.snr_grid)?;
            println!(
                "# C1={} C2={} C3={} C4={} alpha={} beta={} d_min={} Gd={gd} Gc={gc}",
                k.c1, k.c2, k.c3, k.c4, k.alpha, k.beta, k.d_min
            );
            println!("snr_db,ser_ma_avg,ser_bc_avg,ser_bound,asymptote");
            for r in rows {
                println!(
                    "{},{},{},{},{:.6e}",
                    r.snr_db,
                    opt(r.ser_ma_avg),
                    opt(r.ser_bc_avg),
                    opt(r.ser_bound),
                    r.asymptote
                );
            }
            Ok(true)
        }
        Cmd::Selfcheck { draws } => {
            let mut all = true;
            for c in selfcheck(draws) {
                all &= c.passed;
                println!("{} {}  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(all)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
