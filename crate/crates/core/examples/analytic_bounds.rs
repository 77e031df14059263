//! Closed-form machinery: selected-channel CDF and MGF, averaged SER
//! bounds for 4-PAM, and the high-SNR array gain.

use std::f64::consts::FRAC_PI_2;

use twrelay::analysis::{
    array_gain, cdf_min, cdf_selected, mgf_selected, ser_bc_avg, ser_ma_avg, BoundConstants, MgfSpec,
};
use twrelay::modem::{Constellation, Modulation};

fn main() -> twrelay::Result<()> {
    let spec = MgfSpec::new(3, 2, 1.0)?;
    println!("K=3, L=2 selected channel:");
    for z in [0.5, 1.0, 2.0, 4.0] {
        println!("  z={z:<4} F_min={:.4}  F={:.4}", cdf_min(z, &spec), cdf_selected(z, &spec)?);
    }
    for t in [0.0, 0.1, 1.0, 10.0] {
        println!("  psi({t}) = {:.6}", mgf_selected(t, &spec)?);
    }

    let c = Constellation::new(Modulation::Mpam(4))?;
    let k = BoundConstants::new(&c, FRAC_PI_2, 1.0, 1)?;
    let (gd, gc) = array_gain(k.beta, &[1, 1, 1, 1])?;
    println!("\n4-PAM, four single-antenna relays: alpha={:.3} beta={:.3} Gd={gd} Gc={gc:.4}", k.alpha, k.beta);
    println!("{:>6} {:>11} {:>11} {:>11} {:>11}", "dB", "MA", "BC", "total", "asymptote");
    for db in (10..=30).step_by(5) {
        let mu = 10f64.powf(db as f64 / 10.0);
        let s = MgfSpec::new(4, 1, mu)?;
        let ma = ser_ma_avg(&c, &s)?;
        let bc = ser_bc_avg(&s, 1.0, 4)?;
        println!("{db:>6} {ma:>11.3e} {bc:>11.3e} {:>11.3e} {:>11.3e}", ma + bc, k.alpha * (gc * mu).powi(-(gd as i32)));
    }
    Ok(())
}
