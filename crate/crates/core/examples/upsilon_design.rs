//! Rotation-angle design from the difference set of each alphabet.

use std::f64::consts::TAU;

use twrelay::modem::{difference_set, optimize_upsilon, rho_min, Constellation, Modulation};

fn main() -> twrelay::Result<()> {
    for m in [Modulation::Bpsk, Modulation::Qpsk, Modulation::Mpam(4), Modulation::Mpsk(8), Modulation::Mpam(8)] {
        let c = Constellation::new(m)?;
        let d = difference_set(&c);
        let u = optimize_upsilon(&c);
        println!(
            "{m:>5}: |D| = {:4}, d_min = {:.4}, joint gaps = {:2}, best upsilon = {u:.4} rad, rho_min = {:.4}",
            d.len(),
            d.d_min(),
            d.angle_gaps().len(),
            rho_min(u, &d)
        );
    }

    // rho_min over one turn for 4-PAM: zero at 0 and pi, two at pi/2
    let c = Constellation::new(Modulation::Mpam(4))?;
    let d = difference_set(&c);
    println!("\n4pam rho_min(upsilon):");
    for i in 0..=8 {
        let u = TAU * i as f64 / 16.0;
        println!("  {u:.3}  {:.4}", rho_min(u, &d));
    }
    Ok(())
}
