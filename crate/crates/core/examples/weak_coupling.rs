//! Disorder ensembles in the weak-coupling window.

use pinning::disorder::DisorderLaw;
use pinning::renewal::build_renewal;
use pinning::slowvar::SlowlyVarying;
use pinning::weakcoupling::{
    common_h_sweep, ensemble, pathwise_check, scaling_check, Batch, Point,
};

fn main() -> pinning::Result<()> {
    let law = build_renewal(0.75, SlowlyVarying::one(), 4096)?;
    let g = DisorderLaw::gaussian();
    let batch = Batch::new(400, 21);
    for n in [256, 1024] {
        let e = ensemble(
            &law,
            &g,
            Point {
                beta_hat: 1.0,
                h_hat: 0.0,
                t: 1.0,
                n,
            },
            &batch,
        )?;
        println!(
            "N = {n:>4}  beta_N = {:.4}  E[Z^c] = {:.4} ± {:.4}  median log Z^c = {:.4}",
            e.beta_n, e.zc_mean, e.zc_stderr, e.constrained.quantiles[2].1
        );
    }
    let point = Point {
        beta_hat: 1.0,
        h_hat: 0.0,
        t: 1.0,
        n: 512,
    };
    let sweep = common_h_sweep(&law, &g, point, &[-1.0, 0.0, 1.0, 2.0], &batch)?;
    for e in &sweep {
        println!(
            "h_hat = {:+.1}  mean log Z^c = {:.4}",
            e.point.h_hat, e.constrained.mean
        );
    }
    println!("{:?}", pathwise_check(&sweep)?);
    let s = scaling_check(&law, &g, point, 2.0, &Batch::new(1000, 22))?;
    println!("scaling c = 2: KS {:.4} (p = {:.3})", s.ks, s.ks_pvalue);
    Ok(())
}
