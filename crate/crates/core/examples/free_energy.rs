//! Quenched free energy, the finite-size critical point and the smoothing
//! bound.

use pinning::disorder::DisorderLaw;
use pinning::freenergy::{
    critical_point, free_energy, homogeneous_free_energy, smoothing_check, Solver,
};
use pinning::renewal::build_renewal;
use pinning::slowvar::SlowlyVarying;
use pinning::weakcoupling::Batch;

fn main() -> pinning::Result<()> {
    let law = build_renewal(0.75, SlowlyVarying::one(), 2048)?;
    let g = DisorderLaw::gaussian();
    let batch = Batch::new(64, 8);
    for h in [0.05, 0.1, 0.2] {
        let f = free_energy(&law, &g, 0.4, h, &[512, 1024, 2048], &batch)?;
        let f0 = homogeneous_free_energy(&law, h)?;
        println!(
            "h = {h}: F_N = {:?}  annealed/homogeneous F = {f0:.5}",
            f.f_n
        );
    }
    let solver = Solver {
        bracket: (-0.1, 0.3),
        tol: 1e-3,
        ..Solver::default()
    };
    let cp = critical_point(&law, &g, 0.4, &solver, 2048, &batch)?;
    println!(
        "h_c(0.4) ~ {:.4}  CI ({:.4}, {:.4})  rule {}",
        cp.h_c, cp.ci.0, cp.ci.1, cp.rule
    );
    let hs: Vec<f64> = [0.1, 0.2, 0.3].iter().map(|d| cp.h_c + d).collect();
    let sm = smoothing_check(&law, &g, 0.4, cp.h_c, &hs, 2048, &batch)?;
    for (h, f, se, bound) in &sm.rows {
        println!("  h = {h:.4}  F_N = {f:.5} ± {se:.5}  bound {bound:.5}");
    }
    Ok(())
}
