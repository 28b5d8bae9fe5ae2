//! Build a heavy-tailed return-time law, inspect its contact mass and draw a
//! renewal path.

use pinning::renewal::{
    build_renewal, contact_asymptotics_check, intersection_law, sample_renewal,
};
use pinning::rng::{Purpose, SeedRecord};
use pinning::slowvar::SlowlyVarying;

fn main() -> pinning::Result<()> {
    let law = build_renewal(0.6, SlowlyVarying::one(), 100_000)?;
    for n in [1, 10, 100, 1000, 10_000, 100_000] {
        println!(
            "n = {n:>6}  K = {:.3e}  Kbar = {:.3e}  u = {:.3e}",
            law.k[n], law.tail[n], law.u[n]
        );
    }
    println!(
        "renewal residual up to 5000: {:.2e}",
        law.renewal_residual(5000)
    );
    let a = contact_asymptotics_check(&law, 50_000..=100_000)?;
    println!(
        "u(n) n^(1-a) M(n) within {:.3} of 1 on [5e4, 1e5]",
        a.max_rel_dev
    );

    let sigma = intersection_law(&law.truncated(1000))?;
    println!(
        "intersection law: u(500) = {:.4e} = u(500)^2 = {:.4e}",
        sigma.u[500],
        law.u[500].powi(2)
    );

    let mut rng = SeedRecord::for_replica(1, Purpose::Renewal, 0).rng();
    let path = sample_renewal(&law, 10_000, &mut rng);
    let head: Vec<String> = path.points.iter().take(8).map(|p| format!("{p}")).collect();
    println!(
        "{} epochs in [0, 10000]: {} ...",
        path.points.len(),
        head.join(", ")
    );
    Ok(())
}
