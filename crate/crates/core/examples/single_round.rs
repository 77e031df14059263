//! One two-way exchange traced step by step.

use twrelay::math::RngStream;
use twrelay::modem::{optimize_upsilon, Constellation, Modulation};
use twrelay::phy::{effective_angle, sample_channels};
use twrelay::selection::{select, Scheme};
use twrelay::twr::{bc_round, ma_receive, ml_mud, pr_beamform, pr_preprocess};

fn main() -> twrelay::Result<()> {
    let c = Constellation::new(Modulation::Qpsk)?;
    let mut rng = RngStream::new(2024, 0);

    let ch = sample_channels(&[2, 3, 1], &mut rng)?;
    let d = select(Scheme::PrMaxMinRs, &ch);
    let (h, g) = (ch.h(d.relay), ch.g(d.relay));
    println!("selected relay {} with Gamma = {:.3}", d.relay, d.metric);

    let phi = effective_angle(h, g);
    let ups = optimize_upsilon(&c);
    let (u1, u2) = pr_preprocess(phi, ups);
    println!("phi = {phi:.3} rad, upsilon = {ups:.3} rad, u1 = {u1:.3}");

    let (s1, s2) = (rng.index(4), rng.index(4));
    let ps: f64 = 100.0; // 20 dB
    let y = ma_receive(h, g, ps.sqrt() * u1 * c.point(s1), ps.sqrt() * u2 * c.point(s2), 1.0, &mut rng);
    let ma = ml_mud(&y, h, g, u1, u2, ps, &c);
    println!("sent ({s1}, {s2}), relay decided ({}, {}) -> network code {}", ma.s1_hat, ma.s2_hat, ma.s_nc_hat);

    let bf = pr_beamform(h, g, phi)?;
    let (gh, gg) = bf.branch_gains(h, g);
    println!("beam gains |w^T h|^2 = {gh:.3}, |w^T g|^2 = {gg:.3} (Gamma / 2 = {:.3})", d.metric / 2.0);

    let bc = bc_round(&bf, h, g, ma.s_nc_hat, [s1, s2], ps, 1.0, &c, &mut rng);
    println!("source 2 recovered s1 = {}, source 1 recovered s2 = {}", bc.recovered[0], bc.recovered[1]);
    println!("end-to-end errors: {:?}", bc.e2e_errors);
    Ok(())
}
