//! Slowly varying factors, Potter bounds and the universal critical scale.

use pinning::slowvar::{potter_report, SlowlyVarying, UniversalScale};

fn main() -> pinning::Result<()> {
    let grid: Vec<f64> = (0..=50).map(|i| 10f64.powf(i as f64 / 10.0)).collect();
    for l in [
        SlowlyVarying::one(),
        SlowlyVarying::log_power(1.0),
        SlowlyVarying::log_power(-2.0),
    ] {
        let p = potter_report(&l, 0.5, &grid, None)?;
        println!(
            "{:?}: L(1e5) = {:.4}, Potter C(0.5) = {:.4}",
            l,
            l.eval(1e5),
            p.c_delta
        );
        let us = UniversalScale::new(0.75, l)?;
        for x in [1e2, 1e4, 1e6] {
            println!("  L~(x = {x:e}) = {:.6}", us.tilde_l(x, 1e-12)?);
        }
    }
    Ok(())
}
