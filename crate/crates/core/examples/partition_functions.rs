//! Exact free and constrained partition functions on one disorder sample,
//! checked against enumeration, plus the homogeneous Ψ functions.

use pinning::disorder::{sample_disorder, DisorderLaw};
use pinning::partition::{
    brute_force_constrained, psi, psi_c, z_constrained, z_free, PartitionTable, PinParams,
};
use pinning::renewal::build_renewal;
use pinning::rng::SeedRecord;
use pinning::slowvar::SlowlyVarying;

fn main() -> pinning::Result<()> {
    let law = build_renewal(0.75, SlowlyVarying::one(), 4096)?;
    let dlaw = DisorderLaw::gaussian();
    let omega = sample_disorder(&dlaw, 4096, SeedRecord::new(11, 0));
    let p = PinParams::new(&dlaw, 0.5, 0.05)?;

    let dp = z_constrained(&law, &omega, &p, 3, 15)?.exp();
    let bf = brute_force_constrained(&law, &omega, &p, 3, 15)?;
    println!("Z^c(3, 15): DP {dp:.12}  enumeration {bf:.12}");

    let tab = PartitionTable::build(&law, &omega, &p, 4096)?;
    for n in [64, 256, 1024, 4096] {
        println!(
            "n = {n:>4}  log Z = {:>9.4}  log Z^c = {:>9.4}  (direct {:.4})",
            tab.log_free(&law, n),
            tab.log_constrained(&law, n),
            z_free(&law, &omega, &p, n)?
        );
    }
    for delta in [-0.01, 0.0, 0.01] {
        println!(
            "Psi_{delta}(1000) = {:.5}  Psi^c = {:.5}",
            psi(&law, delta, 1000)?,
            psi_c(&law, delta, 1000)?
        );
    }
    Ok(())
}
