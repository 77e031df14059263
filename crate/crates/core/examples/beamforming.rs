//! Gram-Schmidt beamforming: each source receives half of its own
//! channel energy, whatever the angle between the two channels.

use twrelay::math::{sample_cn, RngStream};
use twrelay::phy::effective_angle;
use twrelay::twr::{gram_schmidt, pr_beamform, pr_beamform_or_fallback};
use twrelay::Complex64;

fn main() -> twrelay::Result<()> {
    let mut rng = RngStream::new(7, 0);
    println!("{:>3} {:>9} {:>9} {:>9} {:>9} {:>9}", "L", "|h|^2", "|g|^2", "|w'h|^2", "|w'g|^2", "|r12|");
    for l in [2, 4, 8] {
        let h = sample_cn(&mut rng, l, 1.0);
        let g = sample_cn(&mut rng, l, 1.0);
        let qr = gram_schmidt(&h, &g)?;
        let bf = pr_beamform(&h, &g, effective_angle(&h, &g))?;
        let (a, b) = bf.branch_gains(&h, &g);
        println!(
            "{l:>3} {:>9.4} {:>9.4} {a:>9.4} {b:>9.4} {:>9.4}",
            h.norm_sqr(),
            g.norm_sqr(),
            qr.r12.norm()
        );
    }

    // parallel channels cannot be orthogonalised; the simulator falls back
    // to a single matched beam
    let h = sample_cn(&mut rng, 3, 1.0);
    let g = h.scale(Complex64::new(0.0, 2.0));
    match pr_beamform(&h, &g, 0.0) {
        Err(e) => println!("\nparallel channels: {e}"),
        Ok(_) => unreachable!(),
    }
    let bf = pr_beamform_or_fallback(&h, &g, effective_angle(&h, &g));
    let (a, b) = bf.branch_gains(&h, &g);
    println!("fallback beam gains {a:.4} {b:.4} (|h|^2 = {:.4})", h.norm_sqr());
    Ok(())
}
