//! Continuum series Ψ̂ and its comparison with the lattice Ψ under weak
//! coupling.

use pinning::continuum_psi::{psi_hat, psi_hat_c, uconv_check};
use pinning::renewal::build_renewal;
use pinning::slowvar::SlowlyVarying;

fn main() -> pinning::Result<()> {
    for nu in [0.5, 0.75] {
        for delta in [0.5, 1.0, 2.0] {
            let f = psi_hat(nu, delta, 1.0, 1e-10)?;
            let c = psi_hat_c(nu, delta, 1.0, 1e-10)?;
            println!(
                "nu = {nu} delta = {delta}: Psi = {:.8} ({} terms, tail <= {:.1e})  Psi^c = {:.8}",
                f.value(),
                f.terms.len(),
                f.truncation_bound,
                c.value()
            );
        }
    }
    let law = build_renewal(0.75, SlowlyVarying::one(), 4096)?;
    let t: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let r = uconv_check(&law, 1.0, &t, &[256, 1024, 4096])?;
    for row in &r.rows {
        println!(
            "N = {:>4}  delta_N = {:.4e}  sup |Psi - Psi^| = {:.4}",
            row.n,
            row.delta_n,
            row.sup_dev()
        );
    }
    Ok(())
}
